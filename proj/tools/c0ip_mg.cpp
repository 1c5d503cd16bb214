// Experiment driver: iteration tables, convergence study and oracle checks.

#include <c0ip/experiments.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace
{
  // "3..6", "2,3,5", "4" or "" (empty list).
  std::vector<unsigned>
  parse_list(const std::string &text)
  {
    std::vector<unsigned> out;
    std::size_t           pos = 0;
    while (pos < text.size())
      {
        const std::size_t comma = text.find(',', pos);
        const std::string item  = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? text.size() : comma + 1;
        if (item.empty())
          continue;
        const std::size_t dots = item.find("..");
        if (dots == std::string::npos)
          out.push_back(static_cast<unsigned>(std::stoul(item)));
        else
          {
            const unsigned lo = static_cast<unsigned>(std::stoul(item.substr(0, dots)));
            const unsigned hi = static_cast<unsigned>(std::stoul(item.substr(dots + 2)));
            for (unsigned v = lo; v <= hi; ++v)
              out.push_back(v);
          }
      }
    return out;
  }

  struct Options
  {
    unsigned    dim = 2;
    std::string degrees;
    std::string levels;
    std::string smoother = "mvs";
    unsigned    steps    = 0;
    double      omega    = 0.0;
    std::string local_solver = "fdm";
    std::string coarse       = "smoothing";
    double      penalty_scale = 1.0;
    std::string krylov;
    std::string precision = "double";
    std::string measure   = "auto";
    double      tol       = 1e-8;
    unsigned    max_iterations = 300;
    std::string format    = "csv";
    std::string out;
    bool        parallel  = false;
  };

  void
  add_common(CLI::App *app, Options &o, const std::string &default_degrees,
             const std::string &default_levels)
  {
    o.degrees = default_degrees;
    o.levels  = default_levels;
    app->add_option("--dim", o.dim, "spatial dimension")->check(CLI::IsMember({2u, 3u}));
    app->add_option("--degree", o.degrees, "degrees, e.g. 2..5 or 2,4")->capture_default_str();
    app->add_option("--levels", o.levels, "levels, e.g. 3..6; level l has 2^(l+1) cells per axis")
      ->capture_default_str();
    app->add_option("--smoother", o.smoother)->check(CLI::IsMember({"avs", "mvs"}));
    app->add_option("--steps", o.steps, "smoothing steps (default: 2 for 2D AVS, else 1)")
      ->check(CLI::IsMember({1u, 2u}));
    app->add_option("--omega", o.omega, "damping (default per dimension and smoother)");
    app->add_option("--local-solver", o.local_solver)->check(CLI::IsMember({"exact", "fdm"}));
    app->add_option("--coarse-solver", o.coarse)->check(CLI::IsMember({"smoothing", "exact"}));
    app->add_option("--penalty-scale", o.penalty_scale, "sigma = scale * k (k + 1)");
    app->add_option("--krylov", o.krylov, "default: cg for AVS, gmres for MVS")
      ->check(CLI::IsMember({"cg", "gmres"}));
    app->add_option("--precision", o.precision)->check(CLI::IsMember({"double", "mixed"}));
    app->add_option("--residual", o.measure, "norm of the stopping test; auto is unpreconditioned for mixed precision")
      ->check(CLI::IsMember({"auto", "preconditioned", "unpreconditioned"}));
    app->add_option("--tol", o.tol);
    app->add_option("--max-iterations", o.max_iterations);
    app->add_option("--format", o.format)->check(CLI::IsMember({"csv", "markdown"}));
    app->add_option("--out", o.out, "write to this file instead of stdout");
    app->add_flag("--parallel", o.parallel, "run independent cells concurrently");
  }

  c0ip::ExperimentSpec
  to_spec(const Options &o)
  {
    c0ip::ExperimentSpec s;
    s.dim     = o.dim;
    s.degrees = parse_list(o.degrees);
    s.levels  = parse_list(o.levels);
    s.smoother =
      o.smoother == "avs" ? c0ip::SmootherKind::additive : c0ip::SmootherKind::multiplicative;
    if (o.steps)
      s.steps = o.steps;
    if (o.omega != 0.0)
      s.omega = o.omega;
    s.local_solver =
      o.local_solver == "exact" ? c0ip::LocalSolverKind::exact : c0ip::LocalSolverKind::fdm;
    s.coarse_solver =
      o.coarse == "exact" ? c0ip::CoarseSolverKind::exact : c0ip::CoarseSolverKind::smoothing;
    s.penalty_scale = o.penalty_scale;
    if (!o.krylov.empty())
      s.krylov = o.krylov == "cg" ? c0ip::KrylovKind::cg : c0ip::KrylovKind::gmres;
    s.precision =
      o.precision == "mixed" ? c0ip::Precision::mixed : c0ip::Precision::double_precision;
    if (o.measure != "auto")
      s.measure = o.measure == "preconditioned" ? c0ip::ResidualMeasure::preconditioned :
                                                  c0ip::ResidualMeasure::unpreconditioned;
    s.tol            = o.tol;
    s.max_iterations = o.max_iterations;
    s.format   = o.format == "markdown" ? c0ip::OutputFormat::markdown : c0ip::OutputFormat::csv;
    s.parallel = o.parallel;
    return s;
  }

  void
  emit(const Options &o, const std::string &text)
  {
    if (o.out.empty())
      {
        std::cout << text;
        return;
      }
    std::ofstream file(o.out);
    if (!file)
      throw std::runtime_error("cannot open " + o.out);
    file << text;
  }
} // namespace

int
main(int argc, char **argv)
{
  CLI::App app{"Geometric multigrid for the C0 interior penalty biharmonic problem"};
  app.require_subcommand(1);

  Options table_opts, conv_opts, verify_opts;
  auto   *table = app.add_subcommand("table", "fractional iteration counts per level and degree");
  add_common(table, table_opts, "2..4", "2..5");
  auto *conv = app.add_subcommand("convergence", "energy errors of the manufactured solution");
  add_common(conv, conv_opts, "2,3", "3..6");
  auto *verify = app.add_subcommand("verify", "oracle cross-checks on small meshes");
  add_common(verify, verify_opts, "2..5", "0,1");

  CLI11_PARSE(app, argc, argv);

  try
    {
      if (table->parsed())
        {
          const auto spec    = to_spec(table_opts);
          const auto results = c0ip::run_iterations_table(spec);
          emit(table_opts, c0ip::format_iterations_table(spec, results));
          return c0ip::all_converged(results) ? 0 : 1;
        }
      if (conv->parsed())
        {
          const auto spec = to_spec(conv_opts);
          const auto rows = c0ip::run_convergence_study(spec);
          emit(conv_opts, c0ip::format_convergence_table(spec, rows));
          for (const auto &r : rows)
            if (!r.report.converged)
              return 1;
          return 0;
        }
      const auto spec   = to_spec(verify_opts);
      const auto checks = c0ip::run_verify(spec);
      std::string text;
      for (const auto &c : checks)
        text += std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
      emit(verify_opts, text);
      return c0ip::all_passed(checks) ? 0 : 1;
    }
  catch (const std::invalid_argument &e)
    {
      std::cerr << "invalid configuration: " << e.what() << '\n';
      return 2;
    }
  catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
}
