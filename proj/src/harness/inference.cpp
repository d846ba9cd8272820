#include "harness/inference.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "harness/checkpoint.hpp"
#include "harness/dataset.hpp"
#include "harness/trainer.hpp"

namespace gcrp {

namespace fs = std::filesystem;

namespace {

std::string stem_of_path(const std::string& path) {
    return fs::path(path).stem().string();
}

GrayMap image_to_gray(const ImageU8& img) {
    GrayMap g;
    g.h = img.h;
    g.w = img.w;
    g.v.resize(static_cast<size_t>(img.h * img.w));
    for (int64_t i = 0; i < img.h * img.w; ++i) {
        double acc = 0;
        for (int64_t c = 0; c < img.channels; ++c) {
            acc += img.v[static_cast<size_t>(i * img.channels + c)];
        }
        g.v[static_cast<size_t>(i)] = acc / (255.0 * static_cast<double>(img.channels));
    }
    return g;
}

GrayMap resize_gray(const GrayMap& src, int64_t oh, int64_t ow) {
    if (src.h == oh && src.w == ow) return src;
    GrayMap out;
    out.h = oh;
    out.w = ow;
    out.v.resize(static_cast<size_t>(oh * ow));
    const double sh = static_cast<double>(src.h) / static_cast<double>(oh);
    const double sw = static_cast<double>(src.w) / static_cast<double>(ow);
    for (int64_t r = 0; r < oh; ++r) {
        double sy = std::max(0.0, (r + 0.5) * sh - 0.5);
        const int64_t y0 = std::min<int64_t>(src.h - 1, static_cast<int64_t>(sy));
        const int64_t y1 = std::min<int64_t>(src.h - 1, y0 + 1);
        const double wy = sy - static_cast<double>(y0);
        for (int64_t c = 0; c < ow; ++c) {
            double sx = std::max(0.0, (c + 0.5) * sw - 0.5);
            const int64_t x0 = std::min<int64_t>(src.w - 1, static_cast<int64_t>(sx));
            const int64_t x1 = std::min<int64_t>(src.w - 1, x0 + 1);
            const double wx = sx - static_cast<double>(x0);
            const double top = src.at(y0, x0) * (1.0 - wx) + src.at(y0, x1) * wx;
            const double bot = src.at(y1, x0) * (1.0 - wx) + src.at(y1, x1) * wx;
            out.v[static_cast<size_t>(r * ow + c)] = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

}  // namespace

void run_inference(const std::string& ckpt_path, const std::string& images_dir,
                   const std::string& out_dir) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    GcrpNet<float> model = model_from_checkpoint(ckpt);
    const int64_t s = model.config().input_size;

    const std::vector<std::string> files = list_images(images_dir);
    if (files.empty()) throw ValidationError("no images in " + images_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ValidationError("cannot create " + out_dir);

    for (const std::string& path : files) {
        const ImageU8 img = read_image(path);
        Tensor<float> x3 = prepare_image(img, s);
        Shape xs = x3.shape();
        xs.insert(xs.begin(), 1);
        SaliencyOutputs<float> outs = model.forward(reshape(x3, xs));

        GrayMap sal;
        sal.h = s;
        sal.w = s;
        sal.v.resize(static_cast<size_t>(s * s));
        const float* p = outs.maps[0].data();
        for (int64_t i = 0; i < s * s; ++i) sal.v[static_cast<size_t>(i)] = p[i];
        sal = resize_gray(sal, img.h, img.w);

        std::vector<uint8_t> px(sal.v.size());
        for (size_t i = 0; i < sal.v.size(); ++i) {
            px[i] = static_cast<uint8_t>(
                std::clamp(std::llround(sal.v[i] * 255.0), static_cast<long long>(0),
                           static_cast<long long>(255)));
        }
        write_gray_png(out_dir + "/" + stem_of_path(path) + ".png", px.data(), sal.h, sal.w);
    }
}

EvalReport run_eval(const std::string& pred_dir, const std::string& gt_dir) {
    const std::vector<std::string> preds = list_images(pred_dir);
    const std::vector<std::string> gts = list_images(gt_dir);
    std::map<std::string, std::string> pred_by_stem, gt_by_stem;
    for (const auto& p : preds) pred_by_stem[stem_of_path(p)] = p;
    for (const auto& g : gts) gt_by_stem[stem_of_path(g)] = g;

    std::string missing;
    for (const auto& [stem, path] : gt_by_stem) {
        if (!pred_by_stem.count(stem)) missing += "\n  no prediction for " + path;
    }
    for (const auto& [stem, path] : pred_by_stem) {
        if (!gt_by_stem.count(stem)) missing += "\n  no GT for " + path;
    }
    if (!missing.empty()) throw ValidationError("unpaired evaluation entries:" + missing);
    if (gt_by_stem.empty()) throw ValidationError("nothing to evaluate in " + gt_dir);

    std::vector<GrayMap> pred_maps, gt_maps;
    for (const auto& [stem, gt_path] : gt_by_stem) {
        GrayMap gt = image_to_gray(read_image(gt_path));
        for (double& x : gt.v) x = x >= 0.5 ? 1.0 : 0.0;
        GrayMap pred = image_to_gray(read_image(pred_by_stem.at(stem)));
        pred_maps.push_back(resize_gray(pred, gt.h, gt.w));
        gt_maps.push_back(std::move(gt));
    }
    return evaluate_maps(pred_maps, gt_maps);
}

}  // namespace gcrp
