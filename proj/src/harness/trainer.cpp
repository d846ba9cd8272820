#include "harness/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "harness/adamw.hpp"
#include "harness/checkpoint.hpp"
#include "harness/kvconfig.hpp"
#include "metrics/loss.hpp"

namespace gcrp {

namespace {

// Domain tags keeping the per-epoch shuffle stream and the per-sample
// augmentation streams disjoint.
constexpr uint64_t kShuffleTag = 0xA11CE;
constexpr uint64_t kSampleTag = 0x5EED;

uint64_t sample_seed(uint64_t seed, int64_t epoch, int64_t dataset_index) {
    return Rng::derive(Rng::derive(seed, static_cast<uint64_t>(epoch), kSampleTag),
                       static_cast<uint64_t>(dataset_index));
}

double parse_double(const std::map<std::string, std::string>& kv, const char* key, double dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string(key) + ": bad number '" + it->second + "'");
    }
}

int64_t parse_int(const std::map<std::string, std::string>& kv, const char* key, int64_t dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string(key) + ": bad integer '" + it->second + "'");
    }
}

bool parse_flag(const std::map<std::string, std::string>& kv, const char* key, bool dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError(std::string(key) + ": bad boolean '" + s + "'");
}

Tensor<float> stack_batch(const std::vector<Tensor<float>>& parts) {
    const Shape& one = parts[0].shape();
    Shape full = one;
    full.insert(full.begin(), static_cast<int64_t>(parts.size()));
    Tensor<float> out(full);
    const int64_t per = parts[0].numel();
    for (size_t i = 0; i < parts.size(); ++i) {
        std::copy(parts[i].data(), parts[i].data() + per, out.data() + per * static_cast<int64_t>(i));
    }
    return out;
}

std::string ckpt_path(const std::string& out_dir, int64_t global_step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ckpt_step%06lld.gcrp", static_cast<long long>(global_step));
    return out_dir + "/" + buf;
}

void save_state(const std::string& path, const ModelConfig& mc, const ParamList<float>& params,
                const AdamWState<float>& opt, int64_t epoch, int64_t step_in_epoch,
                int64_t global_step) {
    Checkpoint ckpt;
    ckpt.config_digest = mc.digest();
    ckpt.config_text = mc.canonical_text();
    pack_tensor_entries(params, "param.", ckpt);
    for (size_t i = 0; i < params.size(); ++i) {
        CkptEntry m, v;
        m.name = "opt.m." + params[i].name;
        v.name = "opt.v." + params[i].name;
        m.dtype = v.dtype = CkptDType::f32;
        m.dims = v.dims = params[i].tensor.shape();
        m.raw.resize(opt.m[i].size() * sizeof(float));
        v.raw.resize(opt.v[i].size() * sizeof(float));
        std::memcpy(m.raw.data(), opt.m[i].data(), m.raw.size());
        std::memcpy(v.raw.data(), opt.v[i].data(), v.raw.size());
        ckpt.entries.push_back(std::move(m));
        ckpt.entries.push_back(std::move(v));
    }
    ckpt.add_scalar_i64("state.opt_step", opt.step);
    ckpt.add_scalar_i64("state.epoch", epoch);
    ckpt.add_scalar_i64("state.step_in_epoch", step_in_epoch);
    ckpt.add_scalar_i64("state.global_step", global_step);
    save_checkpoint(path, ckpt);
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lr > 0)) throw ValidationError("lr must be positive");
    if (batch < 1) throw ValidationError("batch must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (checkpoint_every < 0) throw ValidationError("checkpoint_every must be >= 0");
}

TrainConfig TrainConfig::from_kv(const std::map<std::string, std::string>& kv) {
    TrainConfig c;
    c.lr = parse_double(kv, "lr", c.lr);
    c.batch = parse_int(kv, "batch", c.batch);
    c.epochs = parse_int(kv, "epochs", c.epochs);
    c.beta1 = parse_double(kv, "beta1", c.beta1);
    c.beta2 = parse_double(kv, "beta2", c.beta2);
    c.eps = parse_double(kv, "eps", c.eps);
    c.weight_decay = parse_double(kv, "weight_decay", c.weight_decay);
    c.seed = static_cast<uint64_t>(parse_int(kv, "train_seed", static_cast<int64_t>(c.seed)));
    c.augment = parse_flag(kv, "augment", c.augment);
    c.checkpoint_every = parse_int(kv, "checkpoint_every", c.checkpoint_every);
    c.validate();
    return c;
}

TrainResult train_model(const ModelConfig& mc, const TrainConfig& tc, const std::string& data_root,
                        const std::string& out_dir, const std::string& resume_ckpt) {
    mc.validate();
    tc.validate();
    std::filesystem::create_directories(out_dir);

    const std::vector<SamplePaths> samples = list_dataset(data_root);
    const int64_t n = static_cast<int64_t>(samples.size());
    const int64_t batches = (n + tc.batch - 1) / tc.batch;

    GcrpNet<float> model(mc);
    ParamList<float> params = model.params();
    for (auto& p : params) p.tensor.set_requires_grad(true);
    AdamWState<float> opt = AdamWState<float>::create(params);
    AdamWConfig ocfg;
    ocfg.lr = tc.lr;
    ocfg.beta1 = tc.beta1;
    ocfg.beta2 = tc.beta2;
    ocfg.eps = tc.eps;
    ocfg.weight_decay = tc.weight_decay;

    int64_t epoch0 = 0, sie0 = 0, global_step = 0;
    if (!resume_ckpt.empty()) {
        Checkpoint ckpt = load_checkpoint(resume_ckpt);
        if (ckpt.config_digest != mc.digest()) {
            throw ValidationError("resume checkpoint was trained with a different model config");
        }
        unpack_tensor_entries(ckpt, "param.", params);
        for (size_t i = 0; i < params.size(); ++i) {
            const CkptEntry* m = ckpt.find("opt.m." + params[i].name);
            const CkptEntry* v = ckpt.find("opt.v." + params[i].name);
            if (!m || !v) throw ValidationError("resume checkpoint lacks optimizer state");
            std::memcpy(opt.m[i].data(), m->raw.data(), m->raw.size());
            std::memcpy(opt.v[i].data(), v->raw.data(), v->raw.size());
        }
        opt.step = ckpt.get_scalar_i64("state.opt_step");
        epoch0 = ckpt.get_scalar_i64("state.epoch");
        sie0 = ckpt.get_scalar_i64("state.step_in_epoch");
        global_step = ckpt.get_scalar_i64("state.global_step");
    }

    const std::string log_path = out_dir + "/loss_log.csv";
    std::ofstream log(log_path, resume_ckpt.empty() ? std::ios::trunc : std::ios::app);
    if (!log) throw ValidationError("cannot write " + log_path);
    if (resume_ckpt.empty()) log << "global_step,epoch,step_in_epoch,loss\n";

    TrainResult result;
    const int64_t s = mc.input_size;
    for (int64_t epoch = epoch0; epoch < tc.epochs; ++epoch) {
        std::vector<int64_t> order(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
        Rng shuffle_rng(Rng::derive(tc.seed, static_cast<uint64_t>(epoch), kShuffleTag));
        shuffle_rng.shuffle(order);

        for (int64_t b = (epoch == epoch0 ? sie0 : 0); b < batches; ++b) {
            const int64_t lo = b * tc.batch;
            const int64_t hi = std::min<int64_t>(n, lo + tc.batch);
            std::vector<Tensor<float>> imgs, masks;
            for (int64_t k = lo; k < hi; ++k) {
                const int64_t idx = order[static_cast<size_t>(k)];
                Sample smp = load_sample(samples[static_cast<size_t>(idx)], s, tc.augment,
                                         sample_seed(tc.seed, epoch, idx));
                imgs.push_back(smp.image);
                masks.push_back(smp.mask);
            }
            Tensor<float> x = stack_batch(imgs);
            Tensor<float> g = stack_batch(masks);

            for (auto& p : params) p.tensor.zero_grad();
            double loss_value;
            {
                Tape<float> tape;
                SaliencyOutputs<float> outs = model.forward(x);
                Tensor<float> loss = total_loss(outs.maps, g);
                loss_value = static_cast<double>(loss.item());
                if (!std::isfinite(loss_value)) {
                    throw NumericError("training diverged (non-finite loss) at step " +
                                       std::to_string(global_step + 1) +
                                       "; last periodic checkpoint retained");
                }
                tape.backward(loss);
            }
            adamw_step(params, opt, ocfg);
            ++global_step;

            result.steps.push_back({global_step, epoch, b, loss_value});
            char line[96];
            std::snprintf(line, sizeof(line), "%lld,%lld,%lld,%.9g\n",
                          static_cast<long long>(global_step), static_cast<long long>(epoch),
                          static_cast<long long>(b), loss_value);
            log << line;
            log.flush();

            if (tc.checkpoint_every > 0 && global_step % tc.checkpoint_every == 0) {
                const bool epoch_done = b + 1 == batches;
                save_state(ckpt_path(out_dir, global_step), mc, params, opt,
                           epoch_done ? epoch + 1 : epoch, epoch_done ? 0 : b + 1, global_step);
            }
        }
    }

    result.final_checkpoint = out_dir + "/final.gcrp";
    save_state(result.final_checkpoint, mc, params, opt, tc.epochs, 0, global_step);
    return result;
}

double dataset_mae(const GcrpNet<float>& model, const std::vector<SamplePaths>& samples) {
    if (samples.empty()) throw ValidationError("dataset_mae needs samples");
    const int64_t s = model.config().input_size;
    double total = 0;
    for (const auto& sp : samples) {
        Sample smp = load_sample(sp, s, false, 0);
        Shape xs = smp.image.shape();
        xs.insert(xs.begin(), 1);
        Tensor<float> x = reshape(smp.image, xs);
        SaliencyOutputs<float> outs = model.forward(x);
        const float* p = outs.maps[0].data();
        const float* g = smp.mask.data();
        double acc = 0;
        for (int64_t i = 0; i < s * s; ++i) {
            acc += std::fabs(static_cast<double>(p[i]) - static_cast<double>(g[i]));
        }
        total += acc / static_cast<double>(s * s);
    }
    return total / static_cast<double>(samples.size());
}

GcrpNet<float> model_from_checkpoint(const Checkpoint& ckpt) {
    const ModelConfig mc = ModelConfig::from_kv(parse_kv_text(ckpt.config_text));
    if (mc.digest() != ckpt.config_digest) {
        throw ValidationError("checkpoint config text does not match its digest");
    }
    GcrpNet<float> model(mc);
    ParamList<float> params = model.params();
    unpack_tensor_entries(ckpt, "param.", params);
    return model;
}

}  // namespace gcrp
