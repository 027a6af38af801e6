#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrwlab/validation.hpp"

namespace mrw::cli {

/// Run one command (`simulate`, `estimate`, `validate`, `compare`).  args[0] is
/// the program name.  Returns the process exit code: 0 ok, 2 config error,
/// 3 data error, 4 numerical failure, 5 validation FAIL.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// simulate + estimate repeated across reruns and worker counts under `scratch`;
/// passes iff every output file is byte-identical to the first run's.
validation::Verdict determinism_check(std::uint64_t seed, const std::filesystem::path& scratch);

}  // namespace mrw::cli
