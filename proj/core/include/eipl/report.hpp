#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eipl/domain.hpp"
#include "eipl/grading.hpp"

namespace eipl {

struct LengthRow {
  std::string question_id;
  int length = 0;  // words, as counted by count_words
  int count = 0;

  friend bool operator==(const LengthRow&, const LengthRow&) = default;
};

struct CorrectnessRow {
  std::string question_id;
  GradingPolicy policy = GradingPolicy::OneAttempt;
  int correct = 0;
  int total = 0;
  double proportion_correct = 0.0;

  friend bool operator==(const CorrectnessRow&, const CorrectnessRow&) = default;
};

struct ReportTables {
  std::vector<LengthRow> lengths;
  std::vector<CorrectnessRow> correctness;
};

/// Per-question response-length histogram and per-question, per-policy
/// correctness proportions. Rows are sorted by question id, then length or
/// policy.
ReportTables descriptive_report(const std::vector<StudentResponse>& responses,
                                const std::vector<GradingOutcome>& outcomes);

void write_lengths_csv(std::ostream& out, const ReportTables& tables);
void write_correctness_csv(std::ostream& out, const ReportTables& tables);

}  // namespace eipl
