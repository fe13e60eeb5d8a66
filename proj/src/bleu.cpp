// SPDX-License-Identifier: Apache-2.0
#include "hrseq/bleu.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hrseq {

void finalize_bleu(BleuReport& report) {
  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < BleuReport::kMaxOrder; ++n) {
    report.precisions[n] = report.totals[n]
                               ? static_cast<double>(report.matches[n]) /
                                     static_cast<double>(report.totals[n])
                               : 0.0;
    if (report.precisions[n] == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(report.precisions[n]);
    }
  }
  const auto c = static_cast<double>(report.candidate_length);
  const auto r = static_cast<double>(report.reference_length);
  if (report.candidate_length == 0) {
    report.brevity_penalty = 0.0;
  } else {
    report.brevity_penalty = c <= r ? std::exp(1.0 - r / c) : 1.0;
  }
  report.bleu = any_zero ? 0.0
                         : report.brevity_penalty *
                               std::exp(log_sum / static_cast<double>(BleuReport::kMaxOrder));
}

void write_bleu_report(std::ostream& out, const BleuReport& report) {
  auto line = [&out](const std::string& name, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    out << name << '\t' << buf << '\n';
  };
  line("bleu", report.bleu);
  for (std::size_t n = 0; n < BleuReport::kMaxOrder; ++n) {
    line("precision_" + std::to_string(n + 1), report.precisions[n]);
  }
  line("brevity_penalty", report.brevity_penalty);
  out << "candidate_length\t" << report.candidate_length << '\n';
  out << "reference_length\t" << report.reference_length << '\n';
}

}  // namespace hrseq
