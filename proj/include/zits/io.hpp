#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "zits/tensor.hpp"

namespace zits {

/// Malformed file contents or failed file access.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ZTEN: "ZTEN", rank (1 byte), extents (u32 LE each), payload (f64 LE, row-major).
void write_zten(std::ostream& os, const Tensor& t);
Tensor read_zten(std::istream& is);
void save_zten(const std::filesystem::path& path, const Tensor& t);
Tensor load_zten(const std::filesystem::path& path);

/// Binary netpbm raster (P5 grey or P6 colour). Samples are 8-bit when
/// maxval < 256 and big-endian 16-bit otherwise.
struct Netpbm {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::uint32_t maxval = 255;
    std::vector<std::uint16_t> samples;  // interleaved, row-major
};

Netpbm read_netpbm(std::istream& is);
void write_netpbm(std::ostream& os, const Netpbm& img);
Netpbm load_netpbm(const std::filesystem::path& path);
void save_netpbm(const std::filesystem::path& path, const Netpbm& img);

/// Samples scaled to [0, 1] as a (1, channels, H, W) tensor.
Tensor netpbm_to_tensor(const Netpbm& img);
/// Quantises a (1, C, H, W) tensor with C ∈ {1, 3}, clamping to [0, 1].
Netpbm tensor_to_netpbm(const Tensor& t, std::uint32_t maxval);

struct NamedTensor {
    std::string name;
    Tensor value;
};
using ParamList = std::vector<NamedTensor>;

/// Writes `<dir>/manifest.txt` (one "name rank e0 e1 …" line per entry, in
/// order) and one `<name>.zten` per tensor. Creates `dir` if needed.
void save_params(const std::filesystem::path& dir, const ParamList& params);
/// Reads a directory written by save_params, checking every shape against
/// the manifest.
ParamList load_params(const std::filesystem::path& dir);
/// Throws IoError when `name` is absent.
const Tensor& find_param(const ParamList& params, const std::string& name);

}  // namespace zits
