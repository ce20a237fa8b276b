#include "eipl/psychometrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "eipl/errors.hpp"

namespace eipl::irt {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_probability(double p) { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

double cell_loss(double score, double p) { return -(score * std::log(p) + (1.0 - score) * std::log1p(-p)); }

double binary_entropy(double s) {
  double h = 0.0;
  if (s > 0.0) h -= s * std::log(s);
  if (s < 1.0) h -= (1.0 - s) * std::log1p(-s);
  return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

// Flat parameter vector view: [a_0..a_I, b_0..b_I, theta_0..theta_J].
struct Params {
  ItemParameters items;
  AbilityEstimates abilities;
};

double evaluate_loss(std::span<const ScoreMatrix::Cell> cells, const Params& p) {
  double loss = 0.0;
  for (const auto& c : cells) {
    const ItemParameter& item = p.items[c.item];
    loss += cell_loss(c.score, icc_probability(p.abilities[c.student], item.discrimination, item.difficulty));
  }
  return loss;
}

LossGradient evaluate_gradient(std::span<const ScoreMatrix::Cell> cells, const Params& p) {
  LossGradient g;
  g.discrimination.assign(p.items.size(), 0.0);
  g.difficulty.assign(p.items.size(), 0.0);
  g.ability.assign(p.abilities.size(), 0.0);
  for (const auto& c : cells) {
    const ItemParameter& item = p.items[c.item];
    const double theta = p.abilities[c.student];
    const double r = icc_probability(theta, item.discrimination, item.difficulty) - c.score;
    g.discrimination[c.item] += r * (theta - item.difficulty);
    g.difficulty[c.item] -= r * item.discrimination;
    g.ability[c.student] += r * item.discrimination;
  }
  return g;
}

Params projected_step(const Params& from, const LossGradient& g, double step) {
  Params to = from;
  for (std::size_t i = 0; i < to.items.size(); ++i) {
    to.items[i].discrimination = std::clamp(from.items[i].discrimination - step * g.discrimination[i],
                                            kDiscriminationMin, kDiscriminationMax);
    to.items[i].difficulty =
        std::clamp(from.items[i].difficulty - step * g.difficulty[i], kDifficultyMin, kDifficultyMax);
  }
  for (std::size_t j = 0; j < to.abilities.size(); ++j) {
    to.abilities[j] = std::clamp(from.abilities[j] - step * g.ability[j], kThetaMin, kThetaMax);
  }
  return to;
}

void check_shapes(const ScoreMatrix& matrix, const ItemParameters& items, const AbilityEstimates& abilities) {
  if (items.size() != matrix.item_count() || abilities.size() != matrix.student_count()) {
    throw InvalidArgumentError("parameter vectors do not match the score matrix shape");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ScoreMatrix::ScoreMatrix(std::vector<std::string> students, std::vector<std::string> items)
    : students_(std::move(students)), items_(std::move(items)), scores_(students_.size() * items_.size()) {}

std::size_t ScoreMatrix::index(std::size_t student, std::size_t item) const {
  if (student >= students_.size() || item >= items_.size()) {
    throw InvalidArgumentError("score matrix index out of range");
  }
  return student * items_.size() + item;
}

void ScoreMatrix::set(std::size_t student, std::size_t item, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw OutOfRangeError("score " + std::to_string(score) + " is outside [0, 1]");
  }
  scores_[index(student, item)] = score;
}

void ScoreMatrix::set(std::string_view student, std::string_view item, double score) {
  const auto s = std::find(students_.begin(), students_.end(), student);
  const auto i = std::find(items_.begin(), items_.end(), item);
  if (s == students_.end() || i == items_.end()) {
    throw InvalidArgumentError("unknown student or item id");
  }
  set(static_cast<std::size_t>(s - students_.begin()), static_cast<std::size_t>(i - items_.begin()), score);
}

void ScoreMatrix::erase(std::size_t student, std::size_t item) { scores_[index(student, item)].reset(); }

std::optional<double> ScoreMatrix::get(std::size_t student, std::size_t item) const {
  return scores_[index(student, item)];
}

std::size_t ScoreMatrix::observed_count() const {
  return static_cast<std::size_t>(
      std::count_if(scores_.begin(), scores_.end(), [](const auto& s) { return s.has_value(); }));
}

std::vector<ScoreMatrix::Cell> ScoreMatrix::cells() const {
  std::vector<Cell> out;
  for (std::size_t s = 0; s < students_.size(); ++s) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (const auto& v = scores_[s * items_.size() + i]) out.push_back({s, i, *v});
    }
  }
  return out;
}

void ScoreMatrix::check_fittable() const {
  if (observed_count() == 0) throw EmptyMaskError("score matrix has no observed cells");
  for (std::size_t s = 0; s < students_.size(); ++s) {
    bool any = false;
    for (std::size_t i = 0; i < items_.size() && !any; ++i) any = observed(s, i);
    if (!any) throw InvalidArgumentError("student '" + students_[s] + "' has no observed score");
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    bool any = false;
    for (std::size_t s = 0; s < students_.size() && !any; ++s) any = observed(s, i);
    if (!any) throw InvalidArgumentError("item '" + items_[i] + "' has no observed score");
  }
}

ScoreMatrix ScoreMatrix::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw ParseError("score CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw ParseError("score CSV header needs a student column and at least one item");
  std::vector<std::string> items;
  for (std::size_t k = 1; k < header.size(); ++k) items.push_back(trim(header[k]));

  std::vector<std::string> students;
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() > header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": " + std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    fields.resize(header.size());
    students.push_back(trim(fields[0]));
    rows.push_back(std::move(fields));
  }

  ScoreMatrix matrix(std::move(students), std::move(items));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (std::size_t i = 0; i < matrix.item_count(); ++i) {
      const std::string cell = trim(rows[s][i + 1]);
      if (cell.empty()) continue;
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size()) {
        throw ParseError("line " + std::to_string(s + 2) + ", item '" + matrix.items()[i] + "': '" + cell +
                         "' is not a number");
      }
      try {
        matrix.set(s, i, value);
      } catch (const OutOfRangeError& e) {
        throw ParseError("line " + std::to_string(s + 2) + ", item '" + matrix.items()[i] + "': " + e.what());
      }
    }
  }
  return matrix;
}

void ScoreMatrix::to_csv(std::ostream& out) const {
  out << "student";
  for (const auto& item : items_) out << ',' << item;
  out << '\n';
  char buffer[32];
  for (std::size_t s = 0; s < students_.size(); ++s) {
    out << students_[s];
    for (std::size_t i = 0; i < items_.size(); ++i) {
      out << ',';
      // Shortest text that parses back to the same double.
      if (const auto& v = scores_[s * items_.size() + i]) {
        out.write(buffer, std::to_chars(buffer, buffer + sizeof buffer, *v).ptr - buffer);
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

double icc_probability(double theta, double a, double b) { return clamp_probability(sigmoid(a * (theta - b))); }

double cross_entropy_loss(const ScoreMatrix& matrix, const ItemParameters& items, const AbilityEstimates& abilities) {
  check_shapes(matrix, items, abilities);
  const auto cells = matrix.cells();
  if (cells.empty()) throw EmptyMaskError("score matrix has no observed cells");
  return evaluate_loss(cells, Params{items, abilities});
}

double entropy_floor(const ScoreMatrix& matrix) {
  double floor = 0.0;
  for (const auto& c : matrix.cells()) floor += binary_entropy(c.score);
  return floor;
}

LossGradient loss_gradient(const ScoreMatrix& matrix, const ItemParameters& items, const AbilityEstimates& abilities) {
  check_shapes(matrix, items, abilities);
  const auto cells = matrix.cells();
  if (cells.empty()) throw EmptyMaskError("score matrix has no observed cells");
  return evaluate_gradient(cells, Params{items, abilities});
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged:
      return "converged";
    case StopReason::NoDescent:
      return "no_descent";
    case StopReason::MaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

FitResult initial_parameters(const ScoreMatrix& matrix) {
  FitResult result;
  result.items.assign(matrix.item_count(), ItemParameter{1.0, 0.0});
  result.abilities.assign(matrix.student_count(), 0.0);
  std::vector<double> sum(matrix.student_count(), 0.0);
  std::vector<int> count(matrix.student_count(), 0);
  for (const auto& c : matrix.cells()) {
    sum[c.student] += c.score;
    ++count[c.student];
  }
  for (std::size_t s = 0; s < matrix.student_count(); ++s) {
    if (count[s] == 0) continue;
    const double mean = std::clamp(sum[s] / count[s], 0.02, 0.98);
    result.abilities[s] = std::clamp(std::log(mean / (1.0 - mean)), kThetaMin, kThetaMax);
  }
  return result;
}

FitResult fit_2pl(const ScoreMatrix& matrix, const FitConfig& config) {
  matrix.check_fittable();
  if (config.step <= 0 || config.max_iters < 0 || config.max_halvings < 0 || config.tolerance_window < 1) {
    throw InvalidArgumentError("invalid fit configuration");
  }
  const auto cells = matrix.cells();

  FitResult start = initial_parameters(matrix);
  Params current{std::move(start.items), std::move(start.abilities)};
  FitReport report;

  // Degenerate rows/columns are fitted like any other but reported.
  {
    const std::size_t students = matrix.student_count();
    const std::size_t items = matrix.item_count();
    std::vector<int> s_zero(students), s_one(students), s_n(students);
    std::vector<int> i_zero(items), i_one(items), i_n(items);
    for (const auto& c : cells) {
      ++s_n[c.student];
      ++i_n[c.item];
      if (c.score == 0.0) ++s_zero[c.student], ++i_zero[c.item];
      if (c.score == 1.0) ++s_one[c.student], ++i_one[c.item];
    }
    for (std::size_t s = 0; s < students; ++s) {
      if (s_zero[s] == s_n[s] || s_one[s] == s_n[s]) report.degenerate_students.push_back(matrix.students()[s]);
    }
    for (std::size_t i = 0; i < items; ++i) {
      if (i_zero[i] == i_n[i] || i_one[i] == i_n[i]) report.degenerate_items.push_back(matrix.items()[i]);
    }
  }

  double loss = evaluate_loss(cells, current);
  if (!std::isfinite(loss)) throw NonFiniteLossError("loss is not finite at the starting point");
  report.initial_loss = loss;
  report.loss_trajectory.push_back(loss);

  const std::size_t window = static_cast<std::size_t>(config.tolerance_window);
  // Counts accepted iterates only; a momentum restart uses up a pass of
  // the max_iters budget without producing one.
  auto record_iterate = [&] {
    ++report.iterations;
    report.loss_trajectory.push_back(loss);
    if (config.on_iteration) config.on_iteration(report.iterations, current.items, current.abilities);
    const auto& traj = report.loss_trajectory;
    if (traj.size() <= window) return false;
    const double reference = traj[traj.size() - 1 - window];
    return std::abs(reference - loss) / std::max(std::abs(reference), 1e-300) < config.tolerance;
  };

  if (config.method == FitMethod::Plain) {
    for (int iter = 1; iter <= config.max_iters; ++iter) {
      const LossGradient grad = evaluate_gradient(cells, current);
      double step = config.step;
      std::optional<Params> accepted;
      double accepted_loss = loss;
      const int tries = config.backtracking ? config.max_halvings + 1 : 1;
      for (int t = 0; t < tries; ++t, step *= 0.5) {
        Params candidate = projected_step(current, grad, step);
        const double candidate_loss = evaluate_loss(cells, candidate);
        if (!std::isfinite(candidate_loss)) {
          if (!config.backtracking) {
            throw NonFiniteLossError("loss became non-finite at iteration " + std::to_string(iter));
          }
          continue;
        }
        if (!config.backtracking || candidate_loss <= loss) {
          accepted = std::move(candidate);
          accepted_loss = candidate_loss;
          break;
        }
      }
      if (!accepted) {
        report.stop_reason = StopReason::NoDescent;
        break;
      }
      if (accepted_loss > loss) report.monotone = false;
      current = std::move(*accepted);
      loss = accepted_loss;
      if (record_iterate()) {
        report.stop_reason = StopReason::Converged;
        break;
      }
    }
  } else {
    // Extrapolation point, kept inside the box like every iterate.
    Params lookahead = current;
    double momentum = 1.0;
    double step = config.step;
    bool restarted = true;
    for (int iter = 1; iter <= config.max_iters; ++iter) {
      const LossGradient grad = evaluate_gradient(cells, lookahead);
      const double lookahead_loss = evaluate_loss(cells, lookahead);
      if (!std::isfinite(lookahead_loss)) throw NonFiniteLossError("loss became non-finite");

      // Largest step (growing from the last one) satisfying the quadratic
      // upper bound around the lookahead point.
      double trial = config.backtracking ? step * 2.0 : step;
      std::optional<Params> candidate;
      double candidate_loss = 0.0;
      const int tries = config.backtracking ? config.max_halvings + 1 : 1;
      for (int t = 0; t < tries; ++t, trial *= 0.5) {
        Params next = projected_step(lookahead, grad, trial);
        const double next_loss = evaluate_loss(cells, next);
        if (!std::isfinite(next_loss)) continue;
        double linear = 0.0;
        double squared = 0.0;
        auto accumulate = [&](double to, double from, double g) {
          linear += g * (to - from);
          squared += (to - from) * (to - from);
        };
        for (std::size_t i = 0; i < next.items.size(); ++i) {
          accumulate(next.items[i].discrimination, lookahead.items[i].discrimination, grad.discrimination[i]);
          accumulate(next.items[i].difficulty, lookahead.items[i].difficulty, grad.difficulty[i]);
        }
        for (std::size_t j = 0; j < next.abilities.size(); ++j) {
          accumulate(next.abilities[j], lookahead.abilities[j], grad.ability[j]);
        }
        if (!config.backtracking || next_loss <= lookahead_loss + linear + squared / (2.0 * trial)) {
          candidate = std::move(next);
          candidate_loss = next_loss;
          break;
        }
      }

      if (!candidate || candidate_loss > loss) {
        if (restarted) {
          report.stop_reason = StopReason::NoDescent;
          break;
        }
        // Momentum overshot: drop it and retry from the current iterate.
        lookahead = current;
        momentum = 1.0;
        restarted = true;
        continue;
      }
      step = trial;
      const double next_momentum = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
      const double beta = (momentum - 1.0) / next_momentum;
      momentum = next_momentum;
      lookahead = *candidate;
      for (std::size_t i = 0; i < lookahead.items.size(); ++i) {
        ItemParameter& p = lookahead.items[i];
        p.discrimination = std::clamp(p.discrimination + beta * (p.discrimination - current.items[i].discrimination),
                                      kDiscriminationMin, kDiscriminationMax);
        p.difficulty = std::clamp(p.difficulty + beta * (p.difficulty - current.items[i].difficulty),
                                  kDifficultyMin, kDifficultyMax);
      }
      for (std::size_t j = 0; j < lookahead.abilities.size(); ++j) {
        double& theta = lookahead.abilities[j];
        theta = std::clamp(theta + beta * (theta - current.abilities[j]), kThetaMin, kThetaMax);
      }
      const bool progressed = candidate_loss < loss;
      current = std::move(*candidate);
      loss = candidate_loss;
      restarted = false;
      if (record_iterate()) {
        report.stop_reason = StopReason::Converged;
        break;
      }
      if (!progressed && beta == 0.0) {
        report.stop_reason = StopReason::NoDescent;
        break;
      }
    }
  }

  report.final_loss = loss;
  return FitResult{std::move(current.items), std::move(current.abilities), std::move(report)};
}

// ---------------------------------------------------------------------------

std::string_view to_string(DiscriminationBand band) {
  switch (band) {
    case DiscriminationBand::VeryLow:
      return "very_low";
    case DiscriminationBand::Low:
      return "low";
    case DiscriminationBand::Moderate:
      return "moderate";
    case DiscriminationBand::High:
      return "high";
    case DiscriminationBand::VeryHigh:
      return "very_high";
  }
  return "unknown";
}

DiscriminationBand classify_discrimination(double a) {
  if (!(a >= kDiscriminationMin && a <= kDiscriminationMax)) {
    throw OutOfRangeError("discrimination " + std::to_string(a) + " is outside [0, 2]");
  }
  if (a < 0.35) return DiscriminationBand::VeryLow;
  if (a < 0.65) return DiscriminationBand::Low;
  if (a < 1.35) return DiscriminationBand::Moderate;
  if (a < 1.70) return DiscriminationBand::High;
  return DiscriminationBand::VeryHigh;
}

// ---------------------------------------------------------------------------

Json fit_result_json(const ScoreMatrix& matrix, const FitResult& result) {
  Json items = Json::array();
  for (std::size_t i = 0; i < result.items.size(); ++i) {
    const ItemParameter& p = result.items[i];
    items.push_back(Json{{"id", matrix.items()[i]},
                         {"a", p.discrimination},
                         {"b", p.difficulty},
                         {"band", to_string(classify_discrimination(p.discrimination))}});
  }
  Json students = Json::array();
  for (std::size_t s = 0; s < result.abilities.size(); ++s) {
    students.push_back(Json{{"id", matrix.students()[s]}, {"theta", result.abilities[s]}});
  }
  // Keep the trajectory readable: at most ~200 evenly spaced samples.
  const auto& traj = result.report.loss_trajectory;
  Json sampled = Json::array();
  if (!traj.empty()) {
    const std::size_t stride = std::max<std::size_t>(1, (traj.size() + 199) / 200);
    for (std::size_t k = 0; k < traj.size(); k += stride) sampled.push_back(traj[k]);
    if ((traj.size() - 1) % stride != 0) sampled.push_back(traj.back());
  }
  const FitReport& r = result.report;
  return Json{{"items", std::move(items)},
              {"students", std::move(students)},
              {"report",
               Json{{"iterations", r.iterations},
                    {"initial_loss", r.initial_loss},
                    {"final_loss", r.final_loss},
                    {"entropy_floor", entropy_floor(matrix)},
                    {"monotone", r.monotone},
                    {"stop_reason", to_string(r.stop_reason)},
                    {"loss_trajectory_sampled", std::move(sampled)},
                    {"degenerate_students", r.degenerate_students},
                    {"degenerate_items", r.degenerate_items}}}};
}

std::vector<NamedItemParameter> item_parameters_from_json(const Json& doc) {
  std::vector<NamedItemParameter> out;
  try {
    for (const Json& item : doc.at("items")) {
      out.push_back({item.at("id").get<std::string>(), {item.at("a").get<double>(), item.at("b").get<double>()}});
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed item parameter document: ") + e.what());
  }
  return out;
}

void write_icc_csv(std::ostream& out, std::span<const NamedItemParameter> items, double step) {
  if (!(step > 0)) throw InvalidArgumentError("ICC sampling step must be positive");
  out << "theta";
  for (const auto& item : items) out << ',' << item.id;
  out << '\n';
  const int steps = static_cast<int>(std::lround((kThetaMax - kThetaMin) / step));
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  for (int k = 0; k <= steps; ++k) {
    const double theta = kThetaMin + k * step;
    out << std::fixed << std::setprecision(2) << theta << std::defaultfloat << std::setprecision(10);
    for (const auto& item : items) {
      out << ',' << icc_probability(theta, item.params.discrimination, item.params.difficulty);
    }
    out << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace eipl::irt
