#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "zits/mask.hpp"
#include "zits/tensor.hpp"

// Command-line front end. Maps and images are read from and written to
// .pgm/.ppm (netpbm) or .zten files, chosen by extension.

namespace zits::cli {

/// Settings shared by the subcommands, loaded from `key = value` lines.
struct Config {
    double width_fraction = 1.0;
    std::size_t K = 21;
    std::size_t d = 3;
    std::uint64_t seed = 0;
    std::size_t ssu_epochs = 6;
    double ssu_step = 0.05;
    double enms_threshold = 0.25;
    int d_max = 128;
    std::size_t mpe_d = 64;
};

/// '#' starts a comment; blank lines are skipped. Throws
/// std::invalid_argument naming the line on unknown keys or bad values.
Config parse_config(std::istream& is);
Config load_config(const std::filesystem::path& path);

Tensor read_map(const std::filesystem::path& path);
/// .zten stores the tensor exactly; .pgm/.ppm quantise to 16 bits.
void write_map(const std::filesystem::path& path, const Tensor& t);
MaskMap read_mask(const std::filesystem::path& path);

/// Exit codes: 0 success, 1 failure (I/O, shape, failed check), 2 usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zits::cli
