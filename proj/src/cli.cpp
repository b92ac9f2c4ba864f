#include "zits/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "zits/discriminator.hpp"
#include "zits/gradcheck.hpp"
#include "zits/io.hpp"
#include "zits/losses.hpp"
#include "zits/models.hpp"
#include "zits/mpe.hpp"
#include "zits/priors.hpp"
#include "zits/probes.hpp"
#include "zits/ssu.hpp"

namespace zits::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
    T v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("config: bad value '" + text + "' for " + key);
    return v;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string extension(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

// Flags override the config file; unset flags take its value.
template <typename T>
void fill(const CLI::Option* opt, T& flag, const T& config_value) {
    if (opt->count() == 0) flag = config_value;
}

struct Common {
    std::string config_path;
    Config config;
};

// Distances as raw 16-bit samples.
Netpbm distance_pgm(const DistanceMap& d) {
    Netpbm img{d.width, d.height, 1, 65535, {}};
    img.samples.reserve(d.values.size());
    for (int v : d.values) img.samples.push_back(static_cast<std::uint16_t>(v));
    return img;
}

Tensor distance_tensor(const DistanceMap& d) {
    Tensor t = Tensor::nchw(1, 1, d.height, d.width);
    for (std::size_t i = 0; i < d.values.size(); ++i) t[i] = d.values[i];
    return t;
}

Tensor direction_tensor(const DirectionMap& m) {
    Tensor t = Tensor::nchw(1, kDirections, m.height, m.width);
    for (std::size_t y = 0; y < m.height; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            for (std::size_t c = 0; c < kDirections; ++c) t.at(0, c, y, x) = m.at(y, x, static_cast<Direction>(c));
    return t;
}

std::pair<std::size_t, std::size_t> parse_target(const std::string& target, const Shape& in) {
    if (target == "same-size") return {in.h(), in.w()};
    if (!target.empty() && target.back() == 'x') {
        const auto s = parse_number<std::size_t>(target.substr(0, target.size() - 1), "--target");
        return {s * in.h(), s * in.w()};
    }
    const auto x = target.find('x');
    if (x == std::string::npos) throw std::invalid_argument("--target: expected same-size, <s>x or <H>x<W>");
    return {parse_number<std::size_t>(target.substr(0, x), "--target"),
            parse_number<std::size_t>(target.substr(x + 1), "--target")};
}

}  // namespace

Config parse_config(std::istream& is) {
    Config c;
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
        {"width_fraction", [&](const auto& v, const auto& k) { c.width_fraction = parse_number<double>(v, k); }},
        {"K", [&](const auto& v, const auto& k) { c.K = parse_number<std::size_t>(v, k); }},
        {"d", [&](const auto& v, const auto& k) { c.d = parse_number<std::size_t>(v, k); }},
        {"seed", [&](const auto& v, const auto& k) { c.seed = parse_number<std::uint64_t>(v, k); }},
        {"ssu.epochs", [&](const auto& v, const auto& k) { c.ssu_epochs = parse_number<std::size_t>(v, k); }},
        {"ssu.step", [&](const auto& v, const auto& k) { c.ssu_step = parse_number<double>(v, k); }},
        {"enms.threshold", [&](const auto& v, const auto& k) { c.enms_threshold = parse_number<double>(v, k); }},
        {"d_max", [&](const auto& v, const auto& k) { c.d_max = parse_number<int>(v, k); }},
        {"mpe.d", [&](const auto& v, const auto& k) { c.mpe_d = parse_number<std::size_t>(v, k); }},
    };
    std::string line;
    for (std::size_t no = 1; std::getline(is, line); ++no) {
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(no) + ": expected key = value");
        const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("config line " + std::to_string(no) + ": unknown key '" + key + "'");
        it->second(value, key);
    }
    if (!(c.width_fraction > 0.0)) throw std::invalid_argument("config: width_fraction must be positive");
    if (c.K == 0 || c.d == 0) throw std::invalid_argument("config: K and d must be positive");
    if (c.d_max <= 0 || c.mpe_d == 0 || c.mpe_d % 2 != 0) {
        throw std::invalid_argument("config: d_max must be positive and mpe.d a positive even number");
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    return parse_config(is);
}

Tensor read_map(const std::filesystem::path& path) {
    const std::string e = extension(path);
    if (e == ".zten") return load_zten(path);
    if (e == ".pgm" || e == ".ppm") return netpbm_to_tensor(load_netpbm(path));
    throw IoError("unsupported map format: " + path.string());
}

void write_map(const std::filesystem::path& path, const Tensor& t) {
    const std::string e = extension(path);
    if (e == ".zten") return save_zten(path, t);
    if (e == ".pgm" || e == ".ppm") return save_netpbm(path, tensor_to_netpbm(t, 65535));
    throw IoError("unsupported map format: " + path.string());
}

MaskMap read_mask(const std::filesystem::path& path) {
    if (extension(path) == ".zten") return MaskMap::from_tensor(load_zten(path));
    return MaskMap::from_netpbm(load_netpbm(path));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structure priors, positional encodings, losses and block probes for image inpainting", "zits"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "key = value settings file")->check(CLI::ExistingFile);

    std::function<int()> action;

    // mpe
    struct {
        std::string mask, out_dis, out_dis_pgm, out_edis, out_edir, out_ddir, out_mpe;
        std::size_t size = 0, channels = 0;
        int d_max = 0;
        std::uint64_t seed = 0;
    } mpe_args;
    CLI::App* mpe_cmd = app.add_subcommand("mpe", "Masking distance, direction and positional encoding");
    mpe_cmd->add_option("--mask", mpe_args.mask, "mask image (0 = hole)")->required();
    mpe_cmd->add_option("--out-dis", mpe_args.out_dis, "distance map D_dis (.zten)");
    mpe_cmd->add_option("--out-dis-pgm", mpe_args.out_dis_pgm, "distance map as 16-bit PGM");
    mpe_cmd->add_option("--out-edis", mpe_args.out_edis, "sinusoidal distance encoding E_dis (.zten)");
    mpe_cmd->add_option("--out-ddir", mpe_args.out_ddir, "direction codes D_dir (.zten)");
    mpe_cmd->add_option("--out-edir", mpe_args.out_edir, "direction embedding E_dir (.zten)");
    mpe_cmd->add_option("--out-mpe", mpe_args.out_mpe, "full encoding resized to --size (.zten)");
    mpe_cmd->add_option("--size", mpe_args.size, "side of --out-mpe (default: mask height)");
    auto* mpe_channels = mpe_cmd->add_option("--channels", mpe_args.channels, "encoding channels (mpe.d)");
    auto* mpe_dmax = mpe_cmd->add_option("--d-max", mpe_args.d_max, "distance clip (d_max)");
    auto* mpe_seed = mpe_cmd->add_option("--seed", mpe_args.seed, "direction table seed");
    mpe_cmd->callback([&] {
        action = [&]() {
            const Config& c = common.config;
            fill(mpe_channels, mpe_args.channels, c.mpe_d);
            fill(mpe_dmax, mpe_args.d_max, c.d_max);
            fill(mpe_seed, mpe_args.seed, c.seed);
            const MaskMap mask = read_mask(mpe_args.mask);
            const DistanceMap dist = masking_distance(mask, mpe_args.d_max);
            const DirectionMap dirs = masking_direction(mask);
            Rng rng(mpe_args.seed);
            const Tensor table = random_normal(Shape{kDirections, mpe_args.channels}, rng, 0.02);
            if (!mpe_args.out_dis.empty()) save_zten(mpe_args.out_dis, distance_tensor(dist));
            if (!mpe_args.out_dis_pgm.empty()) save_netpbm(mpe_args.out_dis_pgm, distance_pgm(dist));
            if (!mpe_args.out_edis.empty()) save_zten(mpe_args.out_edis, sinusoidal_encode(dist, mpe_args.channels));
            if (!mpe_args.out_ddir.empty()) save_zten(mpe_args.out_ddir, direction_tensor(dirs));
            if (!mpe_args.out_edir.empty()) save_zten(mpe_args.out_edir, direction_embedding(dirs, table));
            if (!mpe_args.out_mpe.empty()) {
                const std::size_t s = mpe_args.size ? mpe_args.size : mask.height();
                save_zten(mpe_args.out_mpe, mpe(mask, table, mpe_args.channels, s, s, {.max_distance = mpe_args.d_max}));
            }
            const int longest = dist.values.empty() ? 0 : *std::max_element(dist.values.begin(), dist.values.end());
            out << "height,width,masked,max_distance,no_cover\n"
                << mask.height() << ',' << mask.width() << ',' << mask.masked_count() << ',' << longest << ','
                << (dirs.no_cover ? 1 : 0) << '\n';
            return 0;
        };
    });

    // rasterize
    struct {
        std::string lines, out;
        std::size_t height = 0, width = 0;
        double scale = 1.0;
    } ras;
    CLI::App* ras_cmd = app.add_subcommand("rasterize", "Render line segments into an anti-aliased map");
    ras_cmd->add_option("--lines", ras.lines, "segment file, one 'x1 y1 x2 y2' per line")->required();
    ras_cmd->add_option("--height", ras.height, "height of the segment coordinate frame")->required();
    ras_cmd->add_option("--width", ras.width, "width of the segment coordinate frame")->required();
    ras_cmd->add_option("--scale", ras.scale, "render on an s-times finer grid")->check(CLI::PositiveNumber);
    ras_cmd->add_option("--out", ras.out, "output map")->required();
    ras_cmd->callback([&] {
        action = [&]() {
            std::vector<LineSegment> segs = load_segments(ras.lines);
            std::size_t h = ras.height, w = ras.width;
            if (ras.scale != 1.0) {
                segs = scale_segments(segs, ras.scale, h, w);
                h = static_cast<std::size_t>(std::llround(ras.scale * static_cast<double>(h)));
                w = static_cast<std::size_t>(std::llround(ras.scale * static_cast<double>(w)));
            }
            write_map(ras.out, rasterize_lines(segs, h, w));
            out << "segments,height,width\n" << segs.size() << ',' << h << ',' << w << '\n';
            return 0;
        };
    });

    // enms
    struct {
        std::string in, out;
        double threshold = 0;
        bool nms_only = false;
    } en;
    CLI::App* en_cmd = app.add_subcommand("enms", "Thin an edge-probability map and fuse it with the raw map");
    en_cmd->add_option("--in", en.in, "edge-probability map")->required();
    en_cmd->add_option("--out", en.out, "output map")->required();
    auto* en_thr = en_cmd->add_option("--threshold", en.threshold, "fusion threshold (enms.threshold)");
    en_cmd->add_flag("--nms-only", en.nms_only, "write the suppressed map without fusion");
    en_cmd->callback([&] {
        action = [&]() {
            fill(en_thr, en.threshold, common.config.enms_threshold);
            const Tensor raw = read_map(en.in);
            const Tensor nms = edge_nms(raw);
            write_map(en.out, en.nms_only ? nms : enms_fuse(raw, nms, en.threshold));
            return 0;
        };
    });

    // upsample
    struct {
        std::string in, out, weights, target = "2x";
    } up;
    CLI::App* up_cmd = app.add_subcommand("upsample", "Upsample a structure map with trained SSU weights");
    up_cmd->add_option("--in", up.in, "input map")->required();
    up_cmd->add_option("--out", up.out, "output map")->required();
    up_cmd->add_option("--weights", up.weights, "directory written by ssu-train");
    up_cmd->add_option("--target", up.target, "same-size, <s>x or <H>x<W>")->capture_default_str();
    up_cmd->callback([&] {
        action = [&]() -> int {
            const Tensor prior = read_map(up.in);
            const auto [th, tw] = parse_target(up.target, prior.shape());
            if (th == prior.shape().h() && tw == prior.shape().w()) {
                write_map(up.out, prior);
                return 0;
            }
            if (up.weights.empty()) throw CLI::ValidationError("--weights", "required unless --target same-size");
            write_map(up.out, ssu_upsample(prior, SsuWeights::from_params(load_params(up.weights)), th, tw));
            return 0;
        };
    });

    // ssu-train
    struct {
        std::string out;
        std::size_t pairs = 2000, size = 64, width = kDefaultSsuWidth, epochs = 0, crop = 24, batch = 8;
        std::size_t val_count = 30, test_count = 0;
        std::uint64_t seed = 0, val_seed = 4242, test_seed = 777;
        double step = 0;
    } tr;
    CLI::App* tr_cmd = app.add_subcommand("ssu-train", "Train the structure upsampler on synthetic line pairs");
    tr_cmd->add_option("--out", tr.out, "weights directory")->required();
    tr_cmd->add_option("--pairs", tr.pairs, "training pairs")->capture_default_str();
    tr_cmd->add_option("--size", tr.size, "low-resolution side")->capture_default_str();
    tr_cmd->add_option("--width", tr.width, "hidden channels")->capture_default_str();
    auto* tr_epochs = tr_cmd->add_option("--epochs", tr.epochs, "epochs (ssu.epochs)");
    auto* tr_step = tr_cmd->add_option("--step", tr.step, "initial step (ssu.step)");
    tr_cmd->add_option("--crop", tr.crop, "training crop side, 0 for whole pairs")->capture_default_str();
    tr_cmd->add_option("--batch", tr.batch, "minibatch size")->capture_default_str();
    auto* tr_seed = tr_cmd->add_option("--seed", tr.seed, "corpus and initialisation seed");
    tr_cmd->add_option("--val-count", tr.val_count, "validation sets for epoch selection, 0 keeps the last epoch")->capture_default_str();
    tr_cmd->add_option("--val-seed", tr.val_seed, "validation seed")->capture_default_str();
    tr_cmd->add_option("--test-count", tr.test_count, "held-out sets scored after training")->capture_default_str();
    tr_cmd->add_option("--test-seed", tr.test_seed, "held-out seed")->capture_default_str();
    tr_cmd->callback([&] {
        action = [&]() {
            const Config& c = common.config;
            fill(tr_epochs, tr.epochs, c.ssu_epochs);
            fill(tr_step, tr.step, c.ssu_step);
            fill(tr_seed, tr.seed, c.seed);
            const auto corpus = make_ssu_corpus(tr.pairs, tr.size, tr.seed);
            SsuWeights w = ssu_init(tr.width, tr.seed);
            SsuTrainConfig cfg;
            cfg.epochs = tr.epochs;
            cfg.step = tr.step;
            cfg.crop = tr.crop;
            cfg.batch = tr.batch;
            cfg.seed = tr.seed;
            SsuScore score;
            if (tr.val_count > 0) {
                score = [&](const SsuWeights& cand) {
                    const SsuEvaluation e = ssu_evaluate(cand, tr.val_count, tr.size, tr.val_seed);
                    return std::min(e.f1_2x, e.f1_4x);
                };
            }
            const SsuTrainReport report = ssu_train(w, corpus, cfg, {}, score);
            out << "epoch,loss,score\n";
            for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
                out << e << ',' << fmt(report.epoch_losses[e]) << ','
                    << (report.epoch_scores.empty() ? "" : fmt(report.epoch_scores[e])) << '\n';
            }
            out << "best_epoch," << report.best_epoch << '\n';
            save_params(tr.out, w.to_params());
            if (tr.test_count > 0) {
                const SsuEvaluation e = ssu_evaluate(w, tr.test_count, tr.size, tr.test_seed);
                out << "f1_2x," << fmt(e.f1_2x) << "\nf1_4x," << fmt(e.f1_4x) << '\n';
            }
            return 0;
        };
    });

    // mask-resize
    struct {
        std::string mask, out, mode = "maxpool";
        std::size_t factor = 8;
    } mr;
    CLI::App* mr_cmd = app.add_subcommand("mask-resize", "Downsample a mask to discriminator patch labels");
    mr_cmd->add_option("--mask", mr.mask, "mask image (0 = hole)")->required();
    mr_cmd->add_option("--factor", mr.factor, "patch size")->capture_default_str();
    mr_cmd->add_option("--mode", mr.mode, "maxpool or nearest")->capture_default_str()->check(CLI::IsMember({"maxpool", "nearest"}));
    mr_cmd->add_option("--out", mr.out, "output mask (.pgm or .zten)")->required();
    mr_cmd->callback([&] {
        action = [&]() {
            const MaskMap in = read_mask(mr.mask);
            const MaskMap res = resize_mask_for_patches(in, mr.factor, parse_mask_resize(mr.mode));
            if (extension(mr.out) == ".zten") {
                save_zten(mr.out, res.to_tensor());
            } else {
                save_netpbm(mr.out, res.to_netpbm());
            }
            out << "height,width,masked_in,masked_out\n"
                << res.height() << ',' << res.width() << ',' << in.masked_count() << ',' << res.masked_count() << '\n';
            return 0;
        };
    });

    // loss
    struct {
        std::string pred, gt, mask, canny, mode = "maxpool";
        std::uint64_t seed = 0;
    } lo;
    CLI::App* lo_cmd = app.add_subcommand("loss", "Evaluate every loss term and the weighted total");
    lo_cmd->add_option("--pred", lo.pred, "predicted image")->required();
    lo_cmd->add_option("--gt", lo.gt, "ground-truth image")->required();
    lo_cmd->add_option("--mask", lo.mask, "mask image (0 = hole)")->required();
    lo_cmd->add_option("--canny", lo.canny, "edge map weighting the gradient prior");
    lo_cmd->add_option("--mask-resize", lo.mode, "patch label rule")->capture_default_str()->check(CLI::IsMember({"maxpool", "nearest"}));
    auto* lo_seed = lo_cmd->add_option("--seed", lo.seed, "stub discriminator and extractor seed");
    lo_cmd->callback([&] {
        action = [&]() {
            fill(lo_seed, lo.seed, common.config.seed);
            const Tensor pred = read_map(lo.pred), gt = read_map(lo.gt);
            require_same_shape(pred, gt, "loss");
            const MaskMap mask = read_mask(lo.mask);
            const PatchDiscriminator disc = make_patch_discriminator(gt.shape().c(), 16, lo.seed);
            const DiscOutput real = disc.forward(gt), fake = disc.forward(pred);
            const MaskMap patches = resize_mask_for_patches(mask, PatchDiscriminator::stride, parse_mask_resize(lo.mode));
            const AdversarialLosses adv = adversarial_losses(real, fake, patches);
            Rng rng(lo.seed + 1);
            const Tensor hrf_w = random_normal(Shape{8, gt.shape().c(), 3, 3}, rng, 1.0 / 3.0);
            const FeatureExtractor extractor = [&](const Tensor& x) {
                return std::vector<Tensor>{conv2d(x, hrf_w, ConvSpec{.pad = 1})};
            };
            LossParts parts;
            parts.l1 = masked_l1(pred, gt, mask);
            parts.adv_d = adv.d;
            parts.adv_g = adv.g;
            parts.gp = gradient_penalty([&](ad::Var x) { return disc.critic(x); }, gt);
            parts.fm = feature_match(real.features, fake.features);
            parts.hrf = hrf_loss(extractor, gt, pred);
            const Tensor canny = lo.canny.empty() ? Tensor::nchw(1, 1, gt.shape().h(), gt.shape().w()) : read_map(lo.canny);
            const double prior = gradient_prior_loss(sobel_gradients(pred), sobel_gradients(gt), canny);
            out << "l1,adv_d,adv_g,gp,fm,hrf,total,gradient_prior\n"
                << fmt(parts.l1) << ',' << fmt(parts.adv_d) << ',' << fmt(parts.adv_g) << ',' << fmt(parts.gp) << ','
                << fmt(parts.fm) << ',' << fmt(parts.hrf) << ',' << fmt(total_loss(parts)) << ',' << fmt(prior) << '\n';
            return 0;
        };
    });

    // grad-check
    struct {
        std::size_t instances = 20;
        std::uint64_t seed = 0;
        double step = 1e-5, tolerance = 1e-5;
    } gc;
    CLI::App* gc_cmd = app.add_subcommand("grad-check", "Compare backward with central differences for every op");
    gc_cmd->add_option("--instances", gc.instances, "random instances per op")->capture_default_str();
    auto* gc_seed = gc_cmd->add_option("--seed", gc.seed, "instance seed");
    gc_cmd->add_option("--step", gc.step, "finite-difference step")->capture_default_str();
    gc_cmd->add_option("--tolerance", gc.tolerance, "relative error bound")->capture_default_str();
    gc_cmd->callback([&] {
        action = [&]() {
            fill(gc_seed, gc.seed, common.config.seed);
            bool ok = true;
            out << "op,max_abs_err,max_rel_err,status\n";
            for (const ad::GradReport& r : ad::gradient_suite(gc.instances, gc.seed, gc.step)) {
                const bool pass = r.max_rel_err <= gc.tolerance;
                ok = ok && pass;
                out << r.name << ',' << fmt(r.max_abs_err) << ',' << fmt(r.max_rel_err) << ',' << (pass ? "PASS" : "FAIL")
                    << '\n';
            }
            return ok ? 0 : 1;
        };
    });

    // shapes
    struct {
        std::string role;
        double width = 0;
        std::size_t size = 256, blocks = 0;
    } sh;
    CLI::App* sh_cmd = app.add_subcommand("shapes", "Print the stage-by-stage shape schedule of a network");
    sh_cmd->add_option("--role", sh.role, "tsr, sfe or ftr")->required()->check(CLI::IsMember({"tsr", "sfe", "ftr"}));
    auto* sh_width = sh_cmd->add_option("--width", sh.width, "width fraction (width_fraction)");
    sh_cmd->add_option("--size", sh.size, "input side, a multiple of 8")->capture_default_str();
    sh_cmd->add_option("--blocks", sh.blocks, "middle blocks, 0 for the full count")->capture_default_str();
    sh_cmd->callback([&] {
        action = [&]() {
            fill(sh_width, sh.width, common.config.width_fraction);
            ModelSpec spec{.role = parse_model_role(sh.role), .width_fraction = sh.width, .blocks = sh.blocks};
            spec.lka_kernel = common.config.K;
            spec.lka_dilation = common.config.d;
            out << "layer,channels,height,width\n";
            for (const LayerShape& l : trace_shapes(spec, sh.size, sh.size)) {
                out << l.name << ',' << l.c << ',' << l.h << ',' << l.w << '\n';
            }
            return 0;
        };
    });

    // bench-lka
    struct {
        std::size_t K = 0, d = 0, size = 256, channels = 64, repeats = 3;
        std::uint64_t seed = 0;
    } bl;
    CLI::App* bl_cmd = app.add_subcommand("bench-lka", "Time a direct depthwise conv against the LKA decomposition");
    auto* bl_K = bl_cmd->add_option("--K", bl.K, "kernel size (K)");
    auto* bl_d = bl_cmd->add_option("--d", bl.d, "dilation (d)");
    bl_cmd->add_option("--size", bl.size, "input side")->capture_default_str();
    bl_cmd->add_option("--channels", bl.channels, "channels")->capture_default_str();
    bl_cmd->add_option("--repeats", bl.repeats, "timing repeats (best is kept)")->capture_default_str();
    auto* bl_seed = bl_cmd->add_option("--seed", bl.seed, "weight and input seed");
    bl_cmd->callback([&] {
        action = [&]() {
            const Config& c = common.config;
            fill(bl_K, bl.K, c.K);
            fill(bl_d, bl.d, c.d);
            fill(bl_seed, bl.seed, c.seed);
            const MacCount direct = direct_depthwise_macs(bl.K);
            const MacCount lka = lka_macs(bl.K, bl.d, bl.channels);
            const LkaBenchmark b = bench_lka(bl.size, bl.channels, bl.K, bl.d, bl.repeats, bl.seed);
            out << "K,d,size,channels,direct_macs,lka_macs,pointwise_macs,direct_seconds,lka_seconds,speedup\n"
                << bl.K << ',' << bl.d << ',' << bl.size << ',' << bl.channels << ',' << direct.total() << ','
                << lka.depthwise << ',' << lka.pointwise << ',' << fmt(b.direct_seconds) << ','
                << fmt(b.decomposed_seconds) << ',' << fmt(b.speedup()) << '\n';
            return 0;
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return 0;
        err << app.help();
        return 2;
    }
    try {
        if (!common.config_path.empty()) common.config = load_config(common.config_path);
    } catch (const std::invalid_argument& e) {
        err << "zits: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "zits: " << e.what() << '\n';
        return 1;
    }
    try {
        return action();
    } catch (const CLI::ValidationError& e) {
        err << "zits: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "zits: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace zits::cli
