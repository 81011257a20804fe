// cli.hpp: command-line entry point.
#pragma once

#include <span>
#include <string>

namespace specdiff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SPECDIFF_OUT_DIR";

int run(int argc, char** argv);

// Arguments without the program name.
int run(std::span<const std::string> args);

}  // namespace specdiff::cli
