#ifndef CLIPLOGIC_CLI_HPP
#define CLIPLOGIC_CLI_HPP

// Command-line harness.  run_cli is the whole program behind tools/main.cpp;
// it is a library function so tests can drive commands in-process and check
// exit codes and emitted files.
//
// Subcommands: gen, audit, certify, optimize, enumerate.
// Exit codes:  0 success (audit: complete), 1 audit incomplete / replay
//              mismatch, 2 any error (I/O, parameters, preconditions).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace cliplogic {

inline constexpr const char* kToolVersion = "0.1.0";

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

// Write-temp-then-rename so readers never observe partial files.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Every structured output embeds one of these; identical manifests imply
// identical outputs.
nlohmann::ordered_json make_manifest(const std::string& command,
                                     nlohmann::ordered_json parameters,
                                     nlohmann::ordered_json input_digests);

}  // namespace cliplogic

#endif  // CLIPLOGIC_CLI_HPP
