#pragma once

#include <functional>
#include <string>

#include "forge/config.hpp"

namespace forge::pipeline {

// progress event: (stage, step, key, value)
using LogFn = std::function<void(const std::string&, std::int64_t, const std::string&, double)>;

const std::vector<std::string>& command_list();

// Runs one pipeline command. Each command writes its artifacts plus a
// `<primary output>.run.json` manifest carrying the config hash, seed, input
// and output hashes, and the wall duration. Errors surface as ForgeError with
// the status that becomes the CLI exit code.
void run_command(const config::RunConfig& cfg, const std::string& command,
                 const LogFn& log = nullptr);

}  // namespace forge::pipeline
