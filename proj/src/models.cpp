#include "zits/models.hpp"

#include <cmath>
#include <stdexcept>

#include "zits/mpe.hpp"
#include "zits/ops.hpp"

namespace zits {
namespace {

constexpr std::size_t kStemKernel = 7;
constexpr ConvSpec kStemSpec{.pad = 3};
constexpr std::size_t kDownKernel = 3;
constexpr ConvSpec kDownSpec{.stride = 2, .pad = 1};
constexpr std::size_t kUpKernel = 4;
constexpr ConvSpec kUpSpec{.stride = 2, .pad = 1};

struct Layout {
    std::array<std::size_t, 4> enc;
    std::array<std::size_t, 3> dec;
    std::size_t head;  // 0: no head
};

Layout layout(ModelRole role) {
    switch (role) {
        case ModelRole::Tsr: return {{64, 128, 256, 256}, {256, 128, 64}, kTsrOutChannels};
        case ModelRole::Sfe: return {{64, 128, 256, 512}, {256, 128, 64}, 0};
        case ModelRole::Ftr: return {{64, 128, 256, 512}, {256, 128, 64}, kFtrOutChannels};
    }
    throw std::invalid_argument("unknown model role");
}

std::size_t in_channels(ModelRole role) {
    switch (role) {
        case ModelRole::Tsr: return kTsrInChannels;
        case ModelRole::Sfe: return kSfeInChannels;
        case ModelRole::Ftr: return kFtrInChannels;
    }
    throw std::invalid_argument("unknown model role");
}

void require_input(const ModelSpec& spec, const Shape& s) {
    if (s.c() != in_channels(spec.role)) {
        throw ShapeError(std::string(to_string(spec.role)) + ": expected " + std::to_string(in_channels(spec.role)) +
                         " input channels, got " + s.str());
    }
    if (s.h() == 0 || s.w() == 0 || s.h() % 8 != 0 || s.w() % 8 != 0) {
        throw ShapeError(std::string(to_string(spec.role)) + ": input " + std::to_string(s.h()) + "x" +
                         std::to_string(s.w()) + " is not a multiple of 8");
    }
}

void record(ShapeTrace* trace, std::string name, const Tensor& t) {
    if (trace) trace->push_back({std::move(name), t.shape().c(), t.shape().h(), t.shape().w()});
}

std::string stage(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

std::string middle_name(const ModelSpec& spec) { return "middle x" + std::to_string(spec.block_count()); }

ConvLayer stage_conv(Rng& rng, std::size_t k, std::size_t cin, std::size_t cout) {
    if (k == 0) return make_conv(rng, cin, cout, kStemKernel, kStemSpec);
    return make_conv(rng, cin, cout, kDownKernel, kDownSpec);
}

}  // namespace

ModelRole parse_model_role(std::string_view name) {
    if (name == "tsr") return ModelRole::Tsr;
    if (name == "sfe") return ModelRole::Sfe;
    if (name == "ftr") return ModelRole::Ftr;
    throw std::invalid_argument("unknown model role '" + std::string(name) + "' (expected tsr, sfe or ftr)");
}

std::string_view to_string(ModelRole role) {
    switch (role) {
        case ModelRole::Tsr: return "tsr";
        case ModelRole::Sfe: return "sfe";
        case ModelRole::Ftr: return "ftr";
    }
    return "?";
}

std::size_t ModelSpec::block_count() const {
    if (blocks) return blocks;
    switch (role) {
        case ModelRole::Tsr: return 8;
        case ModelRole::Sfe: return 3;
        case ModelRole::Ftr: return 9;
    }
    return 0;
}

std::size_t ModelSpec::channels(std::size_t base) const {
    if (!(width_fraction > 0.0)) throw std::invalid_argument("width_fraction must be positive");
    const double half = static_cast<double>(base) * width_fraction / 2.0;
    return std::max<std::size_t>(2, 2 * static_cast<std::size_t>(std::llround(half)));
}

ShapeTrace trace_shapes(const ModelSpec& spec, std::size_t height, std::size_t width) {
    require_input(spec, Shape{1, in_channels(spec.role), height, width});
    const Layout l = layout(spec.role);
    ShapeTrace t;
    std::size_t h = height, w = width;
    for (std::size_t k = 0; k < 4; ++k) {
        if (k > 0) {
            h = conv_output_extent(h, kDownKernel, kDownSpec);
            w = conv_output_extent(w, kDownKernel, kDownSpec);
        }
        t.push_back({stage("enc", k), spec.channels(l.enc[k]), h, w});
    }
    t.push_back({middle_name(spec), spec.channels(l.enc[3]), h, w});
    for (std::size_t k = 0; k < 3; ++k) {
        h = transposed_output_extent(h, kUpKernel, kUpSpec);
        w = transposed_output_extent(w, kUpKernel, kUpSpec);
        t.push_back({stage("dec", k), spec.channels(l.dec[k]), h, w});
    }
    if (l.head) t.push_back({"head", l.head, h, w});
    return t;
}

// TSR

TsrModel make_tsr(const ModelSpec& spec) {
    if (spec.role != ModelRole::Tsr) throw std::invalid_argument("make_tsr: spec role is not tsr");
    Rng rng(spec.seed);
    const Layout l = layout(spec.role);
    TsrModel m;
    m.spec = spec;
    std::size_t cin = kTsrInChannels;
    for (std::size_t k = 0; k < 4; ++k) {
        m.enc[k] = stage_conv(rng, k, cin, spec.channels(l.enc[k]));
        cin = spec.channels(l.enc[k]);
    }
    for (std::size_t i = 0; i < spec.block_count(); ++i) {
        const bool standard = spec.standard_every && i % spec.standard_every == spec.standard_every - 1;
        m.blocks.push_back(make_transformer_block(rng, cin, spec.rpe_capacity, standard));
    }
    for (std::size_t k = 0; k < 3; ++k) {
        m.dec[k] = make_conv(rng, cin, spec.channels(l.dec[k]), kUpKernel, kUpSpec, true);
        cin = spec.channels(l.dec[k]);
    }
    m.head = make_conv(rng, cin, l.head, kStemKernel, kStemSpec);
    return m;
}

Tensor TsrModel::forward(const Tensor& x, ShapeTrace* trace) const {
    require_input(spec, x.shape());
    Tensor h = x;
    for (std::size_t k = 0; k < 4; ++k) {
        h = activate(enc[k].forward(h), Activation::Relu);
        record(trace, stage("enc", k), h);
    }
    for (const TransformerBlockParams& b : blocks) h = transformer_block(h, b);
    record(trace, middle_name(spec), h);
    for (std::size_t k = 0; k < 3; ++k) {
        h = activate(dec[k].forward(h), Activation::Relu);
        record(trace, stage("dec", k), h);
    }
    h = activate(head.forward(h), Activation::Sigmoid);
    record(trace, "head", h);
    return h;
}

// SFE

Tensor DilatedResBlock::forward(const Tensor& x) const {
    const Tensor h = activate(norm1.forward(conv1.forward(x)), Activation::Relu);
    return x + norm2.forward(conv2.forward(h));
}

SfeModel make_sfe(const ModelSpec& spec) {
    if (spec.role != ModelRole::Sfe) throw std::invalid_argument("make_sfe: spec role is not sfe");
    Rng rng(spec.seed);
    const Layout l = layout(spec.role);
    SfeModel m;
    m.spec = spec;
    std::size_t cin = kSfeInChannels;
    for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t cout = spec.channels(l.enc[k]);
        m.enc[k] = k == 0 ? make_gated_conv(rng, cin, cout, kStemKernel, kStemSpec)
                          : make_gated_conv(rng, cin, cout, kDownKernel, kDownSpec);
        m.enc_norm[k] = make_batch_norm(cout);
        cin = cout;
    }
    for (std::size_t i = 0; i < spec.block_count(); ++i) {
        DilatedResBlock b;
        b.conv1 = make_conv(rng, cin, cin, 3, ConvSpec{.dilation = 2, .pad = 2});
        b.conv2 = make_conv(rng, cin, cin, 3, ConvSpec{.pad = 1});
        b.norm1 = make_batch_norm(cin);
        b.norm2 = make_batch_norm(cin);
        m.blocks.push_back(std::move(b));
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t cout = spec.channels(l.dec[k]);
        m.dec[k] = make_gated_conv(rng, cin, cout, kUpKernel, kUpSpec, true);
        m.dec_norm[k] = make_batch_norm(cout);
        cin = cout;
    }
    return m;
}

std::array<Tensor, 4> SfeModel::forward(const Tensor& x, ShapeTrace* trace) const {
    require_input(spec, x.shape());
    Tensor h = x;
    for (std::size_t k = 0; k < 4; ++k) {
        h = activate(enc_norm[k].forward(enc[k].forward(h)), Activation::Relu);
        record(trace, stage("enc", k), h);
    }
    for (const DilatedResBlock& b : blocks) h = b.forward(h);
    record(trace, middle_name(spec), h);
    std::array<Tensor, 4> s;
    s[0] = h;
    for (std::size_t k = 0; k < 3; ++k) {
        h = activate(dec_norm[k].forward(dec[k].forward(h)), Activation::Relu);
        record(trace, stage("dec", k), h);
        s[k + 1] = h;
    }
    return s;
}

// FTR

Tensor FtrStage::forward(const Tensor& x) const {
    return lka_block(activate(norm.forward(conv.forward(x)), Activation::Swish), lka);
}

FtrModel make_ftr(const ModelSpec& spec) {
    if (spec.role != ModelRole::Ftr) throw std::invalid_argument("make_ftr: spec role is not ftr");
    Rng rng(spec.seed);
    const Layout l = layout(spec.role);
    FtrModel m;
    m.spec = spec;
    const auto make_stage = [&](ConvLayer conv) {
        const std::size_t c = conv.out_channels();
        return FtrStage{std::move(conv), make_batch_norm(c), make_lka(rng, c, spec.lka_kernel, spec.lka_dilation)};
    };
    std::size_t cin = kFtrInChannels;
    for (std::size_t k = 0; k < 4; ++k) {
        m.enc[k] = make_stage(stage_conv(rng, k, cin, spec.channels(l.enc[k])));
        cin = spec.channels(l.enc[k]);
    }
    for (std::size_t i = 0; i < spec.block_count(); ++i) m.blocks.push_back(make_ffc_block(rng, cin));
    for (std::size_t k = 0; k < 3; ++k) {
        m.dec[k] = make_stage(make_conv(rng, cin, spec.channels(l.dec[k]), kUpKernel, kUpSpec, true));
        cin = spec.channels(l.dec[k]);
    }
    m.head = make_conv(rng, cin, l.head, kStemKernel, kStemSpec);
    m.direction_table = random_normal(Shape{kDirections, spec.channels(l.enc[0])}, rng, 0.02);
    return m;
}

Tensor FtrModel::make_mpe(const MaskMap& mask, std::size_t height, std::size_t width) const {
    return mpe(mask, direction_table, direction_table.shape().w(), height, width);
}

Tensor FtrModel::forward(const Tensor& x, const FtrInputs& in, ShapeTrace* trace) const {
    require_input(spec, x.shape());
    const auto inject = [&](const Tensor& h, std::size_t k) {
        return in.structure ? zerora_add(h, (*in.structure)[k], alpha[k]) : h;
    };
    Tensor h = enc[0].conv.forward(x);
    if (!in.mpe.empty()) {
        const Shape& ms = in.mpe.shape();
        if (ms.c() != h.shape().c() || ms.h() != h.shape().h() || ms.w() != h.shape().w() ||
            (ms.n() != 1 && ms.n() != h.shape().n())) {
            throw ShapeError("ftr: positional encoding " + ms.str() + " does not match stem output " + h.shape().str());
        }
        const std::size_t plane = ms.c() * ms.h() * ms.w();
        for (std::size_t n = 0; n < h.shape().n(); ++n) {
            const double* src = in.mpe.plane(ms.n() == 1 ? 0 : n, 0);
            double* dst = h.plane(n, 0);
            for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
        }
    }
    h = lka_block(activate(enc[0].norm.forward(h), Activation::Swish), enc[0].lka);
    record(trace, "enc0", h);
    for (std::size_t k = 1; k < 4; ++k) {
        h = enc[k].forward(inject(h, 4 - k));
        record(trace, stage("enc", k), h);
    }
    h = inject(h, 0);
    for (const FfcBlock& b : blocks) h = ffc_block(h, b);
    record(trace, middle_name(spec), h);
    for (std::size_t k = 0; k < 3; ++k) {
        h = dec[k].forward(h);
        record(trace, stage("dec", k), h);
    }
    h = activate(head.forward(h), Activation::Tanh);
    record(trace, "head", h);
    return h;
}

}  // namespace zits
