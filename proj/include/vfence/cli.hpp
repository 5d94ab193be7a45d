#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace vfence::cli {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;

/// Entry point shared by the executable and the tests.
///
///   simulate --scenario <path> --config <path> --out <dir> [--seed N] [--set key=value]...
///   replay   --trace <path> --config <path> --out <dir> [--set key=value]...
///   tune     --suite <path> --grid <path> --out <dir> [--config <path>] [--threads N]
///   report   <metrics>... [--out <dir>]
///
/// Exit 0 on success, 2 for malformed or missing input (the message names
/// the file and location), 1 for anything else. Output files appear only
/// when the whole command succeeds.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vfence::cli
