#pragma once

#include <cstddef>

#include "zits/nn.hpp"
#include "zits/random.hpp"
#include "zits/tensor.hpp"

// Attention over (N, C, H, W) feature maps, where each spatial position is a
// token whose feature is its C-vector. Projection matrices are (C, C) and act
// on row vectors: q_i = x_i·W_q.

namespace zits {

enum class Axis { Row, Col };

/// One axis of axial attention. The relative position table has 2L − 1
/// entries; the bias between positions i and j is rpe[j − i + L − 1].
struct AxisAttention {
    Tensor wq, wk, wv;  // (C, C)
    Tensor rpe;         // (2L − 1)

    std::size_t capacity() const { return (rpe.numel() + 1) / 2; }
    double bias(long i, long j) const { return rpe[static_cast<std::size_t>(j - i + static_cast<long>(capacity()) - 1)]; }
};

/// Separate projections and tables for rows and columns.
struct AxialParams {
    AxisAttention row, col;
};

AxisAttention make_axis_attention(Rng& rng, std::size_t channels, std::size_t capacity);
AxialParams make_axial_params(Rng& rng, std::size_t channels, std::size_t capacity);

/// Row mode attends along W within each row; column mode along H within each
/// column. Logits are x_i·W_q·W_kᵀ·x_jᵀ + R(j − i), unscaled, with a softmax
/// over j. Throws ShapeError when the axis is longer than the table allows.
Tensor axial_attention(const Tensor& x, const AxialParams& p, Axis axis);
Tensor axial_attention(const Tensor& x, const AxisAttention& p, Axis axis);

struct StandardAttentionParams {
    Tensor wq, wk, wv;  // (C, C)
};

StandardAttentionParams make_standard_attention(Rng& rng, std::size_t channels);

/// Dot-product attention over all H·W positions of each sample, with logits
/// scaled by 1/√C.
Tensor standard_attention(const Tensor& x, const StandardAttentionParams& p);

/// Pre-norm block: row attention, column attention, optional standard
/// attention, then a two-layer feed-forward network (GELU, 4× expansion).
/// Every sub-layer is x + out_proj(sublayer(norm(x))).
struct TransformerBlockParams {
    LayerNorm norm_row, norm_col, norm_std, norm_ffn;
    AxialParams axial;
    Linear out_row, out_col;
    bool use_standard = false;
    StandardAttentionParams standard;
    Linear out_std;
    Linear ffn_in, ffn_out;
};

TransformerBlockParams make_transformer_block(Rng& rng, std::size_t channels, std::size_t capacity, bool use_standard);
Tensor transformer_block(const Tensor& x, const TransformerBlockParams& p);

/// Tanh approximation of GELU.
double gelu(double v);

}  // namespace zits
