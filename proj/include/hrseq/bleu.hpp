// SPDX-License-Identifier: Apache-2.0
/**
 * @file   bleu.hpp
 * @brief  Corpus-level BLEU with one reference per candidate, clipped
 *         n-gram counts up to 4-grams, no smoothing.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hrseq/numerics.hpp"

namespace hrseq {

struct BleuReport {
  static constexpr std::size_t kMaxOrder = 4;

  double bleu = 0.0;
  std::array<double, kMaxOrder> precisions{};     // p_n, n = 1..4
  std::array<std::size_t, kMaxOrder> matches{};   // clipped n-gram hits
  std::array<std::size_t, kMaxOrder> totals{};    // candidate n-grams
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

/// Fills precisions, brevity penalty and the score from raw counts.
void finalize_bleu(BleuReport& report);

template <typename Token>
BleuReport bleu(const std::vector<std::vector<Token>>& candidates,
                const std::vector<std::vector<Token>>& references) {
  if (candidates.size() != references.size()) {
    throw InvalidInput("bleu: " + std::to_string(candidates.size()) + " candidates but " +
                       std::to_string(references.size()) + " references");
  }
  if (candidates.empty()) throw InvalidInput("bleu: no candidates");

  BleuReport report;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto& cand = candidates[s];
    const auto& ref = references[s];
    report.candidate_length += cand.size();
    report.reference_length += ref.size();
    for (std::size_t n = 1; n <= BleuReport::kMaxOrder; ++n) {
      std::map<std::vector<Token>, std::size_t> ref_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) {
        ++ref_counts[std::vector<Token>(ref.begin() + i, ref.begin() + i + n)];
      }
      std::map<std::vector<Token>, std::size_t> cand_counts;
      for (std::size_t i = 0; i + n <= cand.size(); ++i) {
        ++cand_counts[std::vector<Token>(cand.begin() + i, cand.begin() + i + n)];
      }
      for (const auto& [gram, count] : cand_counts) {
        report.totals[n - 1] += count;
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) report.matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  finalize_bleu(report);
  return report;
}

/// One `name<TAB>value` line per metric.
void write_bleu_report(std::ostream& out, const BleuReport& report);

}  // namespace hrseq
