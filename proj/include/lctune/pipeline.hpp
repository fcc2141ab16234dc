#pragma once

#include "lctune/config.hpp"
#include "lctune/material.hpp"

#include <exception>
#include <filesystem>
#include <ostream>
#include <string>

namespace lctune {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitNonConvergence = 3,
    kExitIo = 4,
};

// Maps an exception raised by a command to the process exit code.
int exit_code_for(const std::exception& e);

struct CommandEnv {
    RunConfig config;
    std::filesystem::path out_dir;
    int jobs = 1;
    std::ostream* log = nullptr;  // human-readable summary; may be null
};

// Each command writes its files under env.out_dir (created if missing).
void cmd_materials(const MaterialTable& table, std::ostream& out);
void cmd_freedericksz(const CommandEnv& env);
void cmd_tune(const CommandEnv& env);
void cmd_optics(const CommandEnv& env);
void cmd_spiral(const CommandEnv& env);
void cmd_s11(const CommandEnv& env);

// Comment lines opening every output file.
std::string output_header(const RunConfig& config);

}  // namespace lctune
