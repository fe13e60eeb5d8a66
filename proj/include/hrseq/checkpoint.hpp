// SPDX-License-Identifier: Apache-2.0
/**
 * @file   checkpoint.hpp
 * @brief  Checkpoint container: a "key = value" text header followed by
 *         named little-endian float64 tensors. See docs/checkpoint_format.md.
 */
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "hrseq/trainer.hpp"

namespace hrseq {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void save_checkpoint_file(const std::string& path, const Checkpoint& checkpoint);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace hrseq
