#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "zits/attention.hpp"
#include "zits/ffc.hpp"
#include "zits/lka.hpp"
#include "zits/mask.hpp"
#include "zits/nn.hpp"
#include "zits/tensor.hpp"

// The three networks at a configurable width. At width fraction 1 the stage
// channels are 64/128/256/(256 or 512) as in the reference layer table.
// Downsampling is a 3×3 stride-2 conv, upsampling a 4×4 stride-2 transposed
// conv, and stems and heads are 7×7, so every stage halves or doubles H and W
// exactly and inputs must be multiples of 8.

namespace zits {

enum class ModelRole { Tsr, Sfe, Ftr };

ModelRole parse_model_role(std::string_view name);
std::string_view to_string(ModelRole role);

inline constexpr std::size_t kTsrInChannels = 6;   // masked RGB, mask, edge, line
inline constexpr std::size_t kTsrOutChannels = 2;  // edge, line
inline constexpr std::size_t kSfeInChannels = 3;   // edge, line, mask
inline constexpr std::size_t kFtrInChannels = 4;   // masked RGB, mask
inline constexpr std::size_t kFtrOutChannels = 3;

struct ModelSpec {
    ModelRole role = ModelRole::Tsr;
    double width_fraction = 1.0;
    /// Middle blocks; 0 selects the full-scale count (8, 3 or 9).
    std::size_t blocks = 0;
    /// TSR: block i also runs standard attention when i % standard_every
    /// equals standard_every − 1. 0 disables it.
    std::size_t standard_every = 4;
    /// Longest axis the TSR position tables cover, at the bottleneck.
    std::size_t rpe_capacity = 64;
    std::size_t lka_kernel = kDefaultLkaKernel;
    std::size_t lka_dilation = kDefaultLkaDilation;
    std::uint64_t seed = 0;

    std::size_t block_count() const;
    /// Channel count for a full-width stage of `base` channels: base·fraction
    /// rounded to an even number, at least 2.
    std::size_t channels(std::size_t base) const;
};

/// One row of a shape trace.
struct LayerShape {
    std::string name;
    std::size_t c = 0, h = 0, w = 0;

    friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

using ShapeTrace = std::vector<LayerShape>;

/// Stage-by-stage output shapes of `spec` on an H×W input, computed from
/// the layer geometry alone (no weights). Throws ShapeError unless H and W
/// are positive multiples of 8.
ShapeTrace trace_shapes(const ModelSpec& spec, std::size_t height, std::size_t width);

struct TsrModel {
    ModelSpec spec;
    std::array<ConvLayer, 4> enc;
    std::vector<TransformerBlockParams> blocks;
    std::array<ConvLayer, 3> dec;
    ConvLayer head;

    /// (N, 6, H, W) → (N, 2, H, W) edge and line probabilities.
    Tensor forward(const Tensor& x, ShapeTrace* trace = nullptr) const;
};

struct DilatedResBlock {
    ConvLayer conv1, conv2;  // 3×3, dilation 2 then 1
    BatchNorm norm1, norm2;

    Tensor forward(const Tensor& x) const;
};

struct SfeModel {
    ModelSpec spec;
    std::array<GatedConv, 4> enc;
    std::array<BatchNorm, 4> enc_norm;
    std::vector<DilatedResBlock> blocks;
    std::array<GatedConv, 3> dec;
    std::array<BatchNorm, 3> dec_norm;

    /// S_0..S_3 at strides 8, 4, 2, 1: the last middle block and the three
    /// decoder stages.
    std::array<Tensor, 4> forward(const Tensor& x, ShapeTrace* trace = nullptr) const;
};

/// Conv (stride 1, down or up), batch norm, Swish, then the LKA block.
struct FtrStage {
    ConvLayer conv;
    BatchNorm norm;
    LkaParams lka;

    Tensor forward(const Tensor& x) const;
};

struct FtrInputs {
    /// Masking positional encoding added after the stem conv; (1 or N,
    /// C_0, H, W) or empty.
    Tensor mpe;
    /// SFE features; nullptr runs the plain network.
    const std::array<Tensor, 4>* structure = nullptr;
};

struct FtrModel {
    ModelSpec spec;
    std::array<FtrStage, 4> enc;
    std::vector<FfcBlock> blocks;
    std::array<FtrStage, 3> dec;
    ConvLayer head;
    /// ZeroRA weights α_0..α_3; S_k is added to the encoder feature of the
    /// same shape before the next conv (S_0 before the FFC blocks).
    std::array<double, 4> alpha{};
    /// (4, C_0) direction embedding used by make_mpe.
    Tensor direction_table;

    /// (N, 4, H, W) → (N, 3, H, W) in [−1, 1].
    Tensor forward(const Tensor& x, const FtrInputs& in = {}, ShapeTrace* trace = nullptr) const;
    /// MPE for `mask` at the stem width, resized to H×W.
    Tensor make_mpe(const MaskMap& mask, std::size_t height, std::size_t width) const;
};

TsrModel make_tsr(const ModelSpec& spec);
SfeModel make_sfe(const ModelSpec& spec);
FtrModel make_ftr(const ModelSpec& spec);

}  // namespace zits
