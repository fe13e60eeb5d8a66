// SPDX-License-Identifier: Apache-2.0
/**
 * @file   cli.hpp
 * @brief  Command-line front end: preprocess, train, generate, evaluate,
 *         gradcheck and synth subcommands.
 */
#pragma once

#include <iosfwd>

namespace hrseq::cli {

/// Parses argv and runs one subcommand. Returns the process exit status;
/// failures are reported on `err` with a nonzero status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hrseq::cli
