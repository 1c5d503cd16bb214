#pragma once

#include <c0ip/c0ip_operator.hpp>
#include <c0ip/krylov.hpp>
#include <c0ip/multigrid.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace c0ip
{
  enum class KrylovKind
  {
    cg,
    gmres
  };

  enum class OutputFormat
  {
    csv,
    markdown
  };

  /**
   * One experiment: every (level, degree) pair is an independent solve.
   * Unset optional fields take the per dimension / smoother defaults.
   */
  struct ExperimentSpec
  {
    unsigned              dim = 2;
    std::vector<unsigned> degrees{2};
    std::vector<unsigned> levels;

    SmootherKind            smoother = SmootherKind::multiplicative;
    std::optional<unsigned> steps;
    std::optional<double>   omega;
    LocalSolverKind         local_solver  = LocalSolverKind::fdm;
    CoarseSolverKind        coarse_solver = CoarseSolverKind::smoothing;
    double                  penalty_scale = 1.0;

    std::optional<KrylovKind> krylov;
    Precision                 precision      = Precision::double_precision;
    std::optional<ResidualMeasure> measure;
    double                    tol            = 1e-8;
    unsigned                  max_iterations = 300;

    OutputFormat format   = OutputFormat::csv;
    bool         parallel = false;

    /// Dense checks of the verify run skip nothing: levels above this
    /// size are reported as guard violations.
    std::size_t dense_guard = 20000;

    unsigned
    effective_steps() const
    {
      if (steps)
        return *steps;
      return dim == 2 && smoother == SmootherKind::additive ? 2 : 1;
    }

    double
    effective_omega() const
    {
      return omega ? *omega : default_omega(dim, smoother);
    }

    KrylovKind
    effective_krylov() const
    {
      if (krylov)
        return *krylov;
      return smoother == SmootherKind::additive ? KrylovKind::cg : KrylovKind::gmres;
    }

    /// Preconditioned by default. Mixed precision stops on the double
    /// residual b - Ax instead: left-preconditioned GMRES with a single
    /// precision cycle reports residuals its iterate does not reach.
    ResidualMeasure
    effective_measure() const
    {
      if (measure)
        return *measure;
      return precision == Precision::mixed ? ResidualMeasure::unpreconditioned :
                                             ResidualMeasure::preconditioned;
    }

    SmootherConfig
    smoother_config() const
    {
      SmootherConfig cfg;
      cfg.kind         = smoother;
      cfg.steps        = effective_steps();
      cfg.omega        = effective_omega();
      cfg.local_solver = local_solver;
      return cfg;
    }

    /// Checks every field against the module constraints; throws
    /// std::invalid_argument before anything is allocated.
    void
    validate() const
    {
      if (dim != 2 && dim != 3)
        throw std::invalid_argument("dimension must be 2 or 3");
      if (degrees.empty())
        throw std::invalid_argument("at least one polynomial degree required");
      for (unsigned k : degrees)
        if (k < 2 || k > 12)
          throw std::invalid_argument("polynomial degree " + std::to_string(k) +
                                      " outside 2..12");
      for (unsigned l : levels)
        if (l > 15)
          throw std::invalid_argument("level " + std::to_string(l) + " outside 0..15");
      smoother_config().validate(dim);
      if (!(penalty_scale > 0.0))
        throw std::invalid_argument("penalty scale must be positive");
      if (!(tol > 0.0 && tol < 1.0))
        throw std::invalid_argument("tolerance must lie in (0, 1)");
      if (max_iterations == 0)
        throw std::invalid_argument("max_iterations must be positive");
    }
  };

  struct CellResult
  {
    unsigned    level  = 0;
    unsigned    degree = 0;
    std::size_t dofs   = 0;
    SolveReport report;
  };

  /// Solves the manufactured problem on one level with the configured
  /// preconditioner. Returns the report and, if requested, the solution.
  inline CellResult
  run_cell(const ExperimentSpec &spec, unsigned level, unsigned degree,
           std::vector<double> *solution = nullptr, std::optional<double> tol = {})
  {
    const MeshHierarchy    hier(spec.dim, degree, level + 1);
    const Basis1D          basis(degree);
    const double           penalty = default_penalty(degree, spec.penalty_scale);
    const ManufacturedCase mc(spec.dim);
    const VCycleConfig     cfg = make_vcycle_config(spec.smoother_config(), spec.coarse_solver);

    const auto b = assemble_rhs(hier, level, basis, mc, penalty);
    std::vector<double> x(b.size(), 0.0);

    const auto A_high = build_level_operator<double>(hier, level, basis, penalty);
    LinearMap  A      = [&](std::span<const double> u, std::span<double> v) {
      A_high.vmult(u, v);
    };

    std::unique_ptr<Multigrid<double>> mg_double;
    std::unique_ptr<Multigrid<float>>  mg_float;
    LinearMap                          P;
    if (spec.precision == Precision::mixed)
      {
        mg_float = std::make_unique<Multigrid<float>>(hier, spec.penalty_scale, cfg);
        P        = mixed_precision_preconditioner<float>(*mg_float);
      }
    else
      {
        mg_double = std::make_unique<Multigrid<double>>(hier, spec.penalty_scale, cfg);
        P         = [&](std::span<const double> r, std::span<double> y) {
          mg_double->vmult(r, y);
        };
      }

    CellResult result;
    result.level  = level;
    result.degree = degree;
    result.dofs   = b.size();
    const double t = tol ? *tol : spec.tol;
    result.report  = spec.effective_krylov() == KrylovKind::cg ?
                       cg(A, P, b, x, t, spec.max_iterations, spec.effective_measure()) :
                       gmres(A, P, b, x, t, spec.max_iterations, spec.effective_measure());
    if (solution)
      *solution = std::move(x);
    return result;
  }

  /// One solve per (level, degree) pair, levels outer, degrees inner.
  inline std::vector<CellResult>
  run_iterations_table(const ExperimentSpec &spec)
  {
    spec.validate();
    std::vector<std::pair<unsigned, unsigned>> cells;
    for (unsigned l : spec.levels)
      for (unsigned k : spec.degrees)
        cells.emplace_back(l, k);

    std::vector<CellResult> results;
    if (!spec.parallel)
      {
        for (const auto &[l, k] : cells)
          results.push_back(run_cell(spec, l, k));
        return results;
      }
    std::vector<std::future<CellResult>> futures;
    for (const auto &[l, k] : cells)
      futures.push_back(
        std::async(std::launch::async, [&spec, l = l, k = k] { return run_cell(spec, l, k); }));
    for (auto &f : futures)
      results.push_back(f.get());
    return results;
  }

  inline std::string
  format_fractional(const CellResult &c)
  {
    if (!c.report.converged)
      return "—";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", c.report.fractional);
    return buf;
  }

  inline std::string
  smoother_label(const ExperimentSpec &spec)
  {
    std::ostringstream os;
    os << (spec.smoother == SmootherKind::additive ? "AVS" : "MVS") << " ("
       << spec.effective_steps() << (spec.effective_steps() == 1 ? " step" : " steps") << ", "
       << (spec.local_solver == LocalSolverKind::exact ? "exact" : "fdm") << ")";
    return os.str();
  }

  /// Colors used by the smoother: 1 for AVS, 2^(d+1) for MVS.
  inline unsigned
  table_colors(const ExperimentSpec &spec)
  {
    return spec.smoother == SmootherKind::additive ? 1 : n_colors(spec.dim);
  }

  inline std::string
  format_iterations_table(const ExperimentSpec &spec, const std::vector<CellResult> &results)
  {
    std::ostringstream os;
    if (spec.format == OutputFormat::csv)
      {
        os << "level,degree,dofs,iterations,fractional,converged,seconds\n";
        for (const auto &c : results)
          {
            char seconds[32];
            std::snprintf(seconds, sizeof(seconds), "%.3f", c.report.wall_time);
            os << c.level << ',' << c.degree << ',' << c.dofs << ',' << c.report.iterations
               << ',' << format_fractional(c) << ',' << (c.report.converged ? 1 : 0) << ','
               << seconds << '\n';
          }
        return os.str();
      }

    std::vector<unsigned> levels, degrees;
    std::map<std::pair<unsigned, unsigned>, const CellResult *> by_cell;
    for (const auto &c : results)
      {
        if (std::find(levels.begin(), levels.end(), c.level) == levels.end())
          levels.push_back(c.level);
        if (std::find(degrees.begin(), degrees.end(), c.degree) == degrees.end())
          degrees.push_back(c.degree);
        by_cell[{c.level, c.degree}] = &c;
      }
    os << "| " << smoother_label(spec) << " |";
    for (unsigned k : degrees)
      os << " k=" << k << " |";
    os << " Colors |\n|---|";
    for (std::size_t i = 0; i < degrees.size(); ++i)
      os << "---|";
    os << "---|\n";
    for (unsigned l : levels)
      {
        os << "| " << l << " |";
        for (unsigned k : degrees)
          {
            const auto it = by_cell.find({l, k});
            os << ' ' << (it == by_cell.end() ? std::string("") : format_fractional(*it->second))
               << " |";
          }
        os << ' ' << table_colors(spec) << " |\n";
      }
    return os.str();
  }

  inline bool
  all_converged(const std::vector<CellResult> &results)
  {
    for (const auto &c : results)
      if (!c.report.converged)
        return false;
    return true;
  }

  struct ConvergenceRow
  {
    unsigned    level  = 0;
    unsigned    degree = 0;
    std::size_t dofs   = 0;
    double      error  = 0.0;
    double      rate   = std::numeric_limits<double>::quiet_NaN();
    SolveReport report;
  };

  /**
   * Energy error |u - u_h|_h of the manufactured solution per level and the
   * observed rate log2(err_{l-1} / err_l). The algebraic tolerance is
   * tightened to 1e-10 so it stays below the discretization error.
   */
  inline std::vector<ConvergenceRow>
  run_convergence_study(const ExperimentSpec &spec)
  {
    spec.validate();
    std::vector<ConvergenceRow> rows;
    const ManufacturedCase      mc(spec.dim);
    for (unsigned k : spec.degrees)
      {
        double previous = 0.0;
        for (unsigned l : spec.levels)
          {
            std::vector<double> u;
            const auto cell = run_cell(spec, l, k, &u, std::min(spec.tol, 1e-10));
            const MeshHierarchy hier(spec.dim, k, l + 1);
            ConvergenceRow      row;
            row.level  = l;
            row.degree = k;
            row.dofs   = cell.dofs;
            row.report = cell.report;
            row.error  = energy_seminorm_error(hier, l, Basis1D(k),
                                               default_penalty(k, spec.penalty_scale), u, &mc);
            if (previous > 0.0)
              row.rate = std::log2(previous / row.error);
            previous = row.error;
            rows.push_back(row);
          }
      }
    return rows;
  }

  inline std::string
  format_convergence_table(const ExperimentSpec &spec, const std::vector<ConvergenceRow> &rows)
  {
    std::ostringstream os;
    char               buf[160];
    if (spec.format == OutputFormat::csv)
      os << "level,degree,dofs,energy_error,rate,iterations,converged\n";
    else
      os << "| level | k | DoFs | energy error | rate | iterations |\n|---|---|---|---|---|---|\n";
    for (const auto &r : rows)
      {
        char rate[32];
        if (std::isnan(r.rate))
          std::snprintf(rate, sizeof(rate), "%s", spec.format == OutputFormat::csv ? "" : "-");
        else
          std::snprintf(rate, sizeof(rate), "%.3f", r.rate);
        if (spec.format == OutputFormat::csv)
          std::snprintf(buf, sizeof(buf), "%u,%u,%zu,%.6e,%s,%u,%d\n", r.level, r.degree, r.dofs,
                        r.error, rate, r.report.iterations, r.report.converged ? 1 : 0);
        else
          std::snprintf(buf, sizeof(buf), "| %u | %u | %zu | %.4e | %s | %u |\n", r.level,
                        r.degree, r.dofs, r.error, rate, r.report.iterations);
        os << buf;
      }
    return os.str();
  }

  struct CheckResult
  {
    std::string name;
    bool        passed = false;
    std::string detail;
  };

  namespace internal
  {
    inline CheckResult
    guarded_check(const std::string &name, const std::function<std::string(bool &)> &body)
    {
      CheckResult result{name, false, ""};
      try
        {
          result.detail = body(result.passed);
        }
      catch (const std::exception &e)
        {
          result.passed = false;
          result.detail = e.what();
        }
      return result;
    }

    inline std::string
    format_value(const char *what, double value, double bound)
    {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s = %.3e (bound %.1e)", what, value, bound);
      return buf;
    }
  } // namespace internal

  /**
   * Oracle cross-checks per degree and level of the spec: coercivity of
   * the 1D matrices, Kronecker operator vs. dense quadrature assembly,
   * symmetry, FDM exactness on every patch kind, transfer adjointness and
   * the coloring partition. Levels default to 0 and 1.
   */
  inline std::vector<CheckResult>
  run_verify(const ExperimentSpec &spec)
  {
    spec.validate();
    std::vector<unsigned> levels = spec.levels;
    if (levels.empty())
      levels = {0, 1};
    std::vector<CheckResult> checks;
    for (unsigned k : spec.degrees)
      for (unsigned l : levels)
        {
          const std::string tag = "dim=" + std::to_string(spec.dim) + " k=" +
                                  std::to_string(k) + " level=" + std::to_string(l);
          const MeshHierarchy hier(spec.dim, k, l + 1);
          const Basis1D       basis(k);
          const double        penalty = default_penalty(k, spec.penalty_scale);

          checks.push_back(internal::guarded_check("coercivity " + tag, [&](bool &ok) {
            for (unsigned m = 0; m <= l; ++m)
              assemble_axis_matrices(hier, m, basis, penalty);
            ok = true;
            return "B positive definite on all levels, sigma = " + std::to_string(penalty);
          }));

          const bool fits = hier.n_dofs(l) <= spec.dense_guard;
          const auto guard_note = std::to_string(hier.n_dofs(l)) +
                                  " DoFs exceed the dense guard of " +
                                  std::to_string(spec.dense_guard);

          checks.push_back(internal::guarded_check("oracle equivalence " + tag, [&](bool &ok) {
            if (!fits)
              return guard_note;
            const auto   A = build_level_operator<double>(hier, l, basis, penalty).materialize();
            const auto   D = assemble_dense(hier, l, basis, penalty, spec.dense_guard);
            const double rel = (A - D).cwiseAbs().maxCoeff() / D.cwiseAbs().maxCoeff();
            ok               = rel <= 1e-12;
            return internal::format_value("max relative entry difference", rel, 1e-12);
          }));

          checks.push_back(internal::guarded_check("symmetry " + tag, [&](bool &ok) {
            if (!fits)
              return guard_note;
            const auto   A   = build_level_operator<double>(hier, l, basis, penalty).materialize();
            const double rel = (A - A.transpose()).cwiseAbs().maxCoeff() / A.cwiseAbs().maxCoeff();
            ok               = rel <= 1e-14;
            return internal::format_value("relative asymmetry", rel, 1e-14);
          }));

          checks.push_back(internal::guarded_check("fdm exactness " + tag, [&](bool &ok) {
            const auto ax = assemble_axis_matrices(hier, l, basis, penalty);
            std::set<unsigned> seen;
            double             worst = 0.0;
            for (const auto &p : interior_patches(hier, l))
              {
                if (!seen.insert(hier.patch_kind(p)).second)
                  continue;
                std::vector<PatchAxisMatrices<double>> local;
                for (unsigned d = 0; d < spec.dim; ++d)
                  local.push_back(patch_axis_matrices(ax, hier, p, d));
                const auto fdm = build_fdm<double>(local);
                const auto At  = make_patch_operator(local, true).materialize();
                Eigen::MatrixXd X(At.rows(), At.cols());
                for (Eigen::Index j = 0; j < At.cols(); ++j)
                  {
                    std::vector<double> col(At.rows());
                    for (Eigen::Index i = 0; i < At.rows(); ++i)
                      col[i] = At(i, j);
                    const auto u = fdm.apply_inverse(col);
                    for (Eigen::Index i = 0; i < At.rows(); ++i)
                      X(i, j) = u[i];
                  }
                worst = std::max(
                  worst,
                  (X - Eigen::MatrixXd::Identity(X.rows(), X.cols())).cwiseAbs().maxCoeff());
              }
            ok = worst <= 1e-10;
            return internal::format_value("max |FDM^-1 A~ - I|", worst, 1e-10);
          }));

          if (l > 0)
            checks.push_back(internal::guarded_check("transfer adjointness " + tag, [&](bool &ok) {
              const TransferOperators<double> T(hier, basis);
              std::mt19937                    rng(12345);
              std::uniform_real_distribution<double> dist(-1.0, 1.0);
              std::vector<double> c(hier.n_dofs(l - 1)), f(hier.n_dofs(l)), Pc(f.size()),
                Rf(c.size());
              for (auto &v : c)
                v = dist(rng);
              for (auto &v : f)
                v = dist(rng);
              T.prolongate(l, c, Pc);
              T.restrict(l, f, Rf);
              double lhs = 0.0, rhs = 0.0, scale = 0.0;
              for (std::size_t i = 0; i < f.size(); ++i)
                {
                  lhs += Pc[i] * f[i];
                  scale += std::abs(Pc[i] * f[i]);
                }
              for (std::size_t i = 0; i < c.size(); ++i)
                rhs += c[i] * Rf[i];
              const double rel = std::abs(lhs - rhs) / scale;
              ok               = rel <= 1e-13;
              return internal::format_value("|<Pc,f> - <c,Rf>| relative", rel, 1e-13);
            }));

          checks.push_back(internal::guarded_check("coloring partition " + tag, [&](bool &ok) {
            const auto coloring = color_patches(hier, l);
            std::vector<int> seen(hier.n_patches(l), 0);
            bool             disjoint = true;
            const std::size_t nv = hier.vertices_per_axis(l);
            for (const auto &color : coloring.classes)
              {
                std::vector<int> touched(hier.n_dofs(l), 0);
                for (const auto &p : color)
                  {
                    std::size_t id = 0;
                    for (unsigned d = spec.dim; d-- > 0;)
                      id = id * nv + (p.vertex[d] - 1);
                    ++seen[id];
                    for (auto g : patch_dof_map(hier, p))
                      if (touched[g]++)
                        disjoint = false;
                  }
              }
            bool once = true;
            for (int s : seen)
              once = once && s == 1;
            ok = once && disjoint && coloring.classes.size() == n_colors(spec.dim);
            return std::to_string(coloring.classes.size()) + " colors, " +
                   (once ? "every patch once" : "patch multiplicity wrong") + ", " +
                   (disjoint ? "patches within a color disjoint" : "overlap within a color");
          }));
        }
    return checks;
  }

  inline bool
  all_passed(const std::vector<CheckResult> &checks)
  {
    for (const auto &c : checks)
      if (!c.passed)
        return false;
    return true;
  }
} // namespace c0ip
