// Runs each acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eipl/bank.hpp"
#include "eipl/grading.hpp"
#include "eipl/mock_fixture.hpp"
#include "eipl/psychometrics.hpp"
#include "eipl/validation.hpp"
#include "irt_oracles.hpp"

using namespace eipl;
using namespace eipl::irt;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

using Criterion = std::function<void(Verdict&)>;

// --- 1 ---------------------------------------------------------------------
void icc_sanity(Verdict& v) {
  test::Rng rng(1);
  double worst_center = 0;
  int monotone_failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const double a = rng.uniform(kDiscriminationMin, kDiscriminationMax);
    const double b = rng.uniform(kDifficultyMin, kDifficultyMax);
    worst_center = std::max(worst_center, std::abs(icc_probability(b, a, b) - 0.5));
    if (a <= 0) continue;
    double previous = icc_probability(kThetaMin, a, b);
    for (int t = 1; t <= 600; ++t) {
      const double p = icc_probability(kThetaMin + 0.01 * t, a, b);
      if (!(p > previous)) ++monotone_failures;
      previous = p;
    }
  }
  v.require(worst_center <= 1e-12, "|P(b)-0.5| = " + std::to_string(worst_center));
  v.require(monotone_failures == 0, std::to_string(monotone_failures) + " non-increasing grid steps");
  v.detail << "max |P(b)-0.5| = " << worst_center << ", 1000 curves strictly increasing on step 0.01";
}

// --- 2 ---------------------------------------------------------------------
void gradient_check(Verdict& v) {
  test::Rng rng(2);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    auto m = test::random_masked_matrix(rng, 20, 5, 0.7);
    if (m.observed_count() == 0) m.set(0, 0, 0.5);
    const auto p = test::draw_parameters(rng, 20, 5);
    worst = std::max(worst, test::max_gradient_error(m, p.items, p.abilities, 1e-6));
  }
  v.require(worst < 1e-5, "max relative error " + std::to_string(worst));
  v.detail << "100 masked 20x5 matrices, max relative error " << worst;
}

// --- 3 ---------------------------------------------------------------------
void oracle_recovery(Verdict& v) {
  test::Rng rng(3);
  const auto truth = test::draw_parameters(rng, 200, 8);
  const auto m = test::exact_matrix(truth);
  const FitResult fit = fit_2pl(m);
  const double rmse = test::p_matrix_rmse(m, truth, fit);
  const double gap = fit.report.final_loss - test::reference_entropy(m);
  v.require(rmse < 0.02, "P-matrix RMSE " + std::to_string(rmse));
  v.require(gap < 1e-6, "loss gap to entropy floor " + std::to_string(gap));
  v.detail << "RMSE " << rmse << ", loss - entropy floor " << gap << ", " << fit.report.iterations << " iterations";
}

// --- 4 ---------------------------------------------------------------------
void dichotomous_ordering(Verdict& v) {
  test::Rng rng(1);
  const auto truth = test::draw_parameters(rng, 500, 8);
  const auto m = test::bernoulli_matrix(truth, rng);
  const FitResult fit = fit_2pl(m);
  std::vector<double> a_true, a_fit, b_true, b_fit;
  for (std::size_t i = 0; i < truth.items.size(); ++i) {
    a_true.push_back(truth.items[i].discrimination);
    a_fit.push_back(fit.items[i].discrimination);
    b_true.push_back(truth.items[i].difficulty);
    b_fit.push_back(fit.items[i].difficulty);
  }
  const double rho_b = test::spearman(b_true, b_fit);
  const double rho_a = test::spearman(a_true, a_fit);
  v.require(rho_b > 0.9, "Spearman(b) " + std::to_string(rho_b));
  v.require(rho_a > 0.7, "Spearman(a) " + std::to_string(rho_a));
  v.detail << "500x8 Bernoulli, Spearman b " << rho_b << ", a " << rho_a;
}

// --- 5 ---------------------------------------------------------------------
void baker_bands(Verdict& v) {
  const std::vector<std::pair<double, DiscriminationBand>> table = {
      {0.34, DiscriminationBand::VeryLow},  {0.35, DiscriminationBand::Low},
      {0.64, DiscriminationBand::Low},      {0.65, DiscriminationBand::Moderate},
      {1.34, DiscriminationBand::Moderate}, {1.35, DiscriminationBand::High},
      {1.69, DiscriminationBand::High},     {1.70, DiscriminationBand::VeryHigh}};
  for (const auto& [a, band] : table) {
    const DiscriminationBand got = classify_discrimination(a);
    v.require(got == band, std::to_string(a) + " -> " + std::string(to_string(got)));
  }
  v.detail << table.size() << " boundary values classified";
}

// --- 6 ---------------------------------------------------------------------
void difficulty_ordering(Verdict& v) {
  test::Rng rng(1);
  const auto truth = test::draw_parameters(rng, 300, 8, 0.5);
  const auto fractional = test::fractional_matrix(truth, rng, 5);
  const auto thresholded = test::threshold_matrix(fractional);
  const FitResult soft = fit_2pl(fractional);
  const FitResult hard = fit_2pl(thresholded);
  double min_shift = 1e9;
  for (std::size_t i = 0; i < truth.items.size(); ++i) {
    const double shift = hard.items[i].difficulty - soft.items[i].difficulty;
    min_shift = std::min(min_shift, shift);
    v.require(shift >= 0, "item q" + std::to_string(i) + " b moved by " + std::to_string(shift));
  }
  v.detail << "300x8 fractional (5 variants) vs thresholded at 1.0, min b shift " << min_shift;
}

// --- 7 ---------------------------------------------------------------------
void grading_offline(Verdict& v) {
  const QuestionBank bank = load_bank(default_bank_path());
  const MockFixture fixture = load_mock_fixture(test::fixture_path("table1_mock.json"));
  ScriptedClient client(fixture.completions);
  StubBackend backend(fixture.results);
  GradingContext ctx{client, backend, nullptr, GradingSettings{}};

  const std::map<std::string, std::string> relational = {
      {"count_odd_nums_in_list", "count_odd_nums"},
      {"get_numbers_below_threshold", "get_values_under_threshold"},
      {"absolute_values_of_list", "make_values_absolute"},
      {"count_strings_of_given_length", "count_strings_of_length_n"}};
  for (const auto& [qid, name] : relational) {
    const Question& q = *bank.find(qid);
    const StudentResponse r{"s", qid, 1, name, UtcTime{}};
    v.require(grade_one_attempt(r, q, ctx).correct, name + " one-attempt incorrect");
    v.require(grade_robustness(r, q, ctx).correct, name + " robustness incorrect");
  }

  const Question& strings = *bank.find("count_strings_of_given_length");
  const StudentResponse marginal{"s", strings.id, 1, "count_strings", UtcTime{}};
  const GradingOutcome robust = grade_robustness(marginal, strings, ctx);
  const GradingOutcome single = grade_one_attempt(marginal, strings, ctx);
  v.require(!robust.correct, "count_strings robustness correct");
  v.require(std::abs(robust.partial_score - 0.6) < 1e-12, "count_strings partial " + std::to_string(robust.partial_score));
  v.require(single.correct, "count_strings one-attempt incorrect");
  v.detail << "4 relational names correct under both policies; count_strings robustness "
           << robust.partial_score << " (incorrect), one-attempt correct";
}

// --- 8 ---------------------------------------------------------------------
void validation(Verdict& v) {
  auto expect = [&](const std::string& text, bool valid, int words, std::vector<Violation> violations) {
    const ValidationResult r = validate_function_name(text);
    const bool ok = r.valid == valid && r.violations == violations && (words < 0 || r.word_count == words);
    v.require(ok, "example '" + text + "'");
  };
  expect("count_odd_nums", true, 3, {});
  expect("get_values_under_threshold", true, 4, {});
  expect("count odd numbers", false, -1, {Violation::NotAnIdentifier});
  expect("class", false, -1, {Violation::ReservedKeyword});
  expect("a_b_c_d_e_f_g_h_i_j_k", false, 11, {Violation::TooManyWords});

  test::Rng rng(8);
  const std::string alphabet = "abcxyzABC_019";
  const std::string spaces = " \t\n\r\v\f";
  int checked = 0;
  for (int k = 0; k < 5000; ++k) {
    std::string s;
    const std::size_t len = rng.index(15);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.index(alphabet.size())];
    s.insert(rng.index(s.size() + 1), 1, spaces[rng.index(spaces.size())]);
    v.require(!validate_function_name(s).valid, "whitespace string accepted");
    ++checked;
  }
  for (const std::string& kw : reserved_keywords()) {
    v.require(!validate_function_name(kw).valid, "keyword '" + kw + "' accepted");
    v.require(!validate_function_name(kw + " ").valid, "padded keyword '" + kw + "' accepted");
    ++checked;
  }
  v.detail << "5 examples exact; " << checked << " whitespace/keyword strings rejected";
}

// --- 9 ---------------------------------------------------------------------
void kappa(Verdict& v) {
  using Labels = std::vector<std::string>;
  auto k = [](const Labels& a, const Labels& b) {
    return cohens_kappa(std::span<const std::string>(a), std::span<const std::string>(b));
  };
  const Labels same = {"R", "RE", "M", "ME", "O", "R"};
  v.require(k(same, same) == 1.0, "identical lists");
  const double worked = k({"R", "R", "M", "O"}, {"R", "M", "M", "O"});
  v.require(std::abs(worked - 7.0 / 11.0) <= 1e-9, "worked example " + std::to_string(worked));

  test::Rng rng(9);
  const Labels universe = {"R", "RE", "M", "ME", "O"};
  Labels a, b;
  for (int i = 0; i < 60; ++i) {
    a.push_back(universe[rng.index(5)]);
    b.push_back(rng.bernoulli(0.7) ? a.back() : universe[rng.index(5)]);
  }
  const double base = k(a, b);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Labels perm = universe;
    for (std::size_t j = perm.size() - 1; j > 0; --j) std::swap(perm[j], perm[rng.index(j + 1)]);
    auto relabel = [&](const Labels& in) {
      Labels out;
      for (const auto& l : in) out.push_back(perm[std::find(universe.begin(), universe.end(), l) - universe.begin()]);
      return out;
    };
    worst = std::max(worst, std::abs(k(relabel(a), relabel(b)) - base));
  }
  v.require(worst <= 1e-12, "relabeling changed kappa by " + std::to_string(worst));
  v.detail << "worked example " << worked << ", max change under 100 relabelings " << worst;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    double limit_s;  // 0 = no runtime bound
    Criterion run;
  };
  const std::vector<Entry> criteria = {
      {1, "ICC sanity", 1.0, icc_sanity},
      {2, "gradient check", 10.0, gradient_check},
      {3, "oracle recovery", 60.0, oracle_recovery},
      {4, "dichotomous ordering", 120.0, dichotomous_ordering},
      {5, "Baker bands", 0.0, baker_bands},
      {6, "difficulty ordering after thresholding", 0.0, difficulty_ordering},
      {7, "grading policies offline", 0.0, grading_offline},
      {8, "name validation", 0.0, validation},
      {9, "Cohen's kappa", 0.0, kappa},
  };

  int failures = 0;
  for (const Entry& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0) v.require(seconds < c.limit_s, "runtime " + std::to_string(seconds) + "s over limit");
    failures += !v.pass;
    std::printf("%s [%d] %s: %s (%.2fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.str().c_str(), seconds);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
