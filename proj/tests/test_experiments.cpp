#include <c0ip/experiments.hpp>

#include <gtest/gtest.h>

#include <regex>
#include <sstream>

using namespace c0ip;

namespace
{
  ExperimentSpec
  small_spec()
  {
    ExperimentSpec s;
    s.degrees = {2, 3};
    s.levels  = {1, 2, 3};
    return s;
  }

  std::vector<std::string>
  numbers(const std::string &text, const std::regex &pattern)
  {
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern);
         it != std::sregex_iterator(); ++it)
      out.push_back((*it)[1]);
    return out;
  }

  std::string
  without_seconds(const std::string &csv)
  {
    std::istringstream in(csv);
    std::string        line, out;
    while (std::getline(in, line))
      out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  }
} // namespace

TEST(ExperimentSpec, Validation)
{
  auto s = small_spec();
  EXPECT_NO_THROW(s.validate());
  s.dim = 4;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s         = small_spec();
  s.degrees = {1};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s         = small_spec();
  s.degrees = {};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s          = small_spec();
  s.smoother = SmootherKind::additive;
  s.omega    = 0.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s     = small_spec();
  s.tol = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s               = small_spec();
  s.penalty_scale = -1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s       = small_spec();
  s.steps = 3;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(ExperimentSpec, DefaultsPerDimensionAndSmoother)
{
  ExperimentSpec s;
  s.smoother = SmootherKind::additive;
  EXPECT_EQ(s.effective_steps(), 2u);
  EXPECT_EQ(s.effective_omega(), 0.25);
  EXPECT_EQ(s.effective_krylov(), KrylovKind::cg);
  s.dim = 3;
  EXPECT_EQ(s.effective_steps(), 1u);
  EXPECT_EQ(s.effective_omega(), 0.1);
  s.smoother = SmootherKind::multiplicative;
  EXPECT_EQ(s.effective_omega(), 0.7);
  EXPECT_EQ(s.effective_krylov(), KrylovKind::gmres);
  s.dim = 2;
  EXPECT_EQ(s.effective_steps(), 1u);
  EXPECT_EQ(s.effective_omega(), 1.0);
  s.krylov = KrylovKind::cg;
  EXPECT_EQ(s.effective_krylov(), KrylovKind::cg);
  EXPECT_EQ(s.effective_measure(), ResidualMeasure::preconditioned);
  s.precision = Precision::mixed;
  EXPECT_EQ(s.effective_measure(), ResidualMeasure::unpreconditioned);
  s.measure = ResidualMeasure::preconditioned;
  EXPECT_EQ(s.effective_measure(), ResidualMeasure::preconditioned);
}

TEST(IterationsTable, EmptyLevelRange)
{
  auto s   = small_spec();
  s.levels = {};
  const auto results = run_iterations_table(s);
  EXPECT_TRUE(results.empty());
  EXPECT_TRUE(all_converged(results));
  EXPECT_EQ(format_iterations_table(s, results),
            "level,degree,dofs,iterations,fractional,converged,seconds\n");
}

TEST(IterationsTable, CsvAndMarkdownCarryTheSameNumbers)
{
  auto       s       = small_spec();
  const auto results = run_iterations_table(s);
  ASSERT_EQ(results.size(), 6u);
  EXPECT_TRUE(all_converged(results));
  const auto csv = format_iterations_table(s, results);
  s.format       = OutputFormat::markdown;
  const auto md  = format_iterations_table(s, results);

  const auto from_csv = numbers(csv, std::regex(R"(\n\d+,\d+,\d+,\d+,([0-9.]+|—),)"));
  const auto from_md  = numbers(md, std::regex(R"(\| ([0-9]+\.[0-9]+|—) )"));
  EXPECT_EQ(from_csv.size(), 6u);
  EXPECT_EQ(from_csv, from_md);
  EXPECT_NE(md.find("Colors"), std::string::npos);
  EXPECT_NE(md.find("| 8 |"), std::string::npos);
}

TEST(IterationsTable, NonConvergedCellIsDash)
{
  auto s           = small_spec();
  s.degrees        = {2};
  s.levels         = {3};
  s.tol            = 1e-14;
  s.max_iterations = 1;
  const auto results = run_iterations_table(s);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_FALSE(results[0].report.converged);
  EXPECT_EQ(results[0].report.residual_history.size(), 2u);
  EXPECT_FALSE(all_converged(results));
  EXPECT_NE(format_iterations_table(s, results).find(",—,0,"), std::string::npos);
}

TEST(IterationsTable, DeterministicAndCellwiseReproducible)
{
  const auto s  = small_spec();
  const auto t1 = format_iterations_table(s, run_iterations_table(s));
  const auto t2 = format_iterations_table(s, run_iterations_table(s));
  EXPECT_EQ(without_seconds(t1), without_seconds(t2));

  auto single    = s;
  single.levels  = {2};
  single.degrees = {3};
  const auto one = run_iterations_table(single);
  for (const auto &c : run_iterations_table(s))
    if (c.level == 2 && c.degree == 3)
      {
        EXPECT_EQ(c.report.residual_history, one[0].report.residual_history);
      }

  auto par     = s;
  par.parallel = true;
  EXPECT_EQ(without_seconds(format_iterations_table(par, run_iterations_table(par))),
            without_seconds(t1));
}

TEST(IterationsTable, AdditiveWithConjugateGradients)
{
  auto s     = small_spec();
  s.smoother = SmootherKind::additive;
  s.levels   = {3};
  for (const auto &c : run_iterations_table(s))
    {
      EXPECT_TRUE(c.report.converged);
      EXPECT_GT(c.report.fractional, 0.0);
    }
}

TEST(ConvergenceStudy, RatesAndFormat)
{
  auto s    = small_spec();
  s.degrees = {2};
  s.levels  = {1, 2, 3, 4};
  const auto rows = run_convergence_study(s);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(std::isnan(rows[0].rate));
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_LT(rows[i].error, rows[i - 1].error);
  EXPECT_GE(rows.back().rate, 0.85);
  const auto csv = format_convergence_table(s, rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "level,degree,dofs,energy_error,rate,iterations,converged");
}

TEST(Verify, DefaultConfigurationPasses)
{
  ExperimentSpec s;
  s.degrees         = {2, 3, 4, 5};
  const auto checks = run_verify(s);
  EXPECT_GE(checks.size(), 20u);
  for (const auto &c : checks)
    EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(all_passed(checks));
}

TEST(Verify, UnderPenalizedRunNamesSigma)
{
  ExperimentSpec s;
  s.degrees       = {2};
  s.penalty_scale = 0.01;
  const auto checks = run_verify(s);
  EXPECT_FALSE(all_passed(checks));
  bool found = false;
  for (const auto &c : checks)
    if (c.name.rfind("coercivity", 0) == 0)
      {
        EXPECT_FALSE(c.passed);
        EXPECT_NE(c.detail.find("sigma"), std::string::npos);
        found = true;
      }
  EXPECT_TRUE(found);
}

TEST(Verify, GuardViolationsAreReportedPerCheck)
{
  ExperimentSpec s;
  s.degrees     = {2};
  s.levels      = {3};
  s.dense_guard = 100;
  const auto checks = run_verify(s);
  unsigned   guarded = 0;
  for (const auto &c : checks)
    if (c.detail.find("dense guard") != std::string::npos)
      {
        EXPECT_FALSE(c.passed);
        ++guarded;
      }
  EXPECT_EQ(guarded, 2u);
}

TEST(Verify, ThreeDimensionalFourCellsDegreeThree)
{
  ExperimentSpec s;
  s.dim             = 3;
  s.degrees         = {3};
  s.levels          = {1};
  const auto checks = run_verify(s);
  EXPECT_TRUE(all_passed(checks));
}
