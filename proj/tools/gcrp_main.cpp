// Command-line front end. Talks to the library exclusively through the C
// API so the CLI doubles as a usage example for gcrpnet.h.
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>

#include "CLI11.hpp"
#include "gcrpnet/gcrpnet.h"

namespace {

int finish(gcrp_status st) {
    if (st != GCRP_OK) std::fprintf(stderr, "error: %s\n", gcrp_last_error());
    return static_cast<int>(st);
}

void print_owned(char* text) {
    if (!text) return;
    const size_t n = std::strlen(text);
    std::fputs(text, stdout);
    if (n == 0 || text[n - 1] != '\n') std::fputc('\n', stdout);
    gcrp_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gcrpnet: salient object detection for remote sensing imagery"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap worker threads (overrides GCRP_THREADS)");

    auto* train = app.add_subcommand("train", "train a model");
    std::string tr_config, tr_data, tr_out, tr_resume;
    train->add_option("--config", tr_config, "key=value config file (model + training keys)")
        ->required();
    train->add_option("--data", tr_data, "dataset root (images/ + GT/)")->required();
    train->add_option("--out", tr_out, "output directory for checkpoints and loss log")
        ->required();
    train->add_option("--resume", tr_resume, "checkpoint to continue from");

    auto* infer = app.add_subcommand("infer", "write saliency maps for a directory of images");
    std::string in_ckpt, in_images, in_out;
    infer->add_option("--ckpt", in_ckpt, "checkpoint file")->required();
    infer->add_option("--images", in_images, "input image directory")->required();
    infer->add_option("--out", in_out, "output directory for saliency PNGs")->required();

    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string ev_pred, ev_gt, ev_report;
    eval->add_option("--pred", ev_pred, "prediction directory")->required();
    eval->add_option("--gt", ev_gt, "ground-truth directory")->required();
    eval->add_option("--report", ev_report,
                     "report path (also writes <report>.csv and <report>.curves.csv)")
        ->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    int64_t sy_n = 20, sy_size = 64;
    uint64_t sy_seed = 1;
    std::string sy_out;
    synth->add_option("--n", sy_n, "number of images");
    synth->add_option("--size", sy_size, "square image side");
    synth->add_option("--seed", sy_seed, "generator seed");
    synth->add_option("--out", sy_out, "output dataset root")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gc_scope = "all";
    gradcheck->add_option("--scope", gc_scope, "op, block, model, or all")
        ->check(CLI::IsMember({"op", "block", "model", "all"}));

    auto* scan = app.add_subcommand("scan-dump", "print a block scan visit order");
    scan->set_help_flag("--help", "print help");  // frees -h for --h
    int64_t sc_h = 8, sc_w = 8, sc_grid = 1;
    std::string sc_dir = "rightward";
    scan->add_option("--h", sc_h, "map height");
    scan->add_option("--w", sc_w, "map width");
    scan->add_option("--grid", sc_grid, "block grid size g");
    scan->add_option("--dir", sc_dir, "rightward, downward, leftward, or upward");

    auto* bench = app.add_subcommand("bench", "time one op");
    std::string be_op, be_shape = "64x64x64";
    bench->add_option("--op", be_op,
                      "matmul, conv2d, ssm_scan, ssm_scan_assoc, gat, or model_forward")
        ->required();
    bench->add_option("--shape", be_shape, "'x'-separated dims, e.g. 128x128x64");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // usage problems are validation errors
    }

    if (threads > 0) gcrp_set_threads(threads);

    if (*train) {
        char* summary = nullptr;
        const gcrp_status st =
            gcrp_train(tr_config.c_str(), tr_data.c_str(), tr_out.c_str(),
                       tr_resume.empty() ? nullptr : tr_resume.c_str(), &summary);
        print_owned(summary);
        return finish(st);
    }
    if (*infer) {
        return finish(gcrp_infer(in_ckpt.c_str(), in_images.c_str(), in_out.c_str()));
    }
    if (*eval) {
        char* summary = nullptr;
        const gcrp_status st =
            gcrp_eval(ev_pred.c_str(), ev_gt.c_str(), ev_report.c_str(), &summary);
        print_owned(summary);
        return finish(st);
    }
    if (*synth) {
        return finish(gcrp_synth(sy_n, sy_size, sy_seed, sy_out.c_str()));
    }
    if (*gradcheck) {
        char* report = nullptr;
        const gcrp_status st = gcrp_gradcheck(gc_scope.c_str(), &report);
        print_owned(report);
        return finish(st);
    }
    if (*scan) {
        char* text = nullptr;
        const gcrp_status st = gcrp_scan_dump(sc_h, sc_w, sc_grid, sc_dir.c_str(), &text);
        print_owned(text);
        return finish(st);
    }
    if (*bench) {
        char* text = nullptr;
        const gcrp_status st = gcrp_bench(be_op.c_str(), be_shape.c_str(), &text);
        print_owned(text);
        return finish(st);
    }
    return 2;
}
