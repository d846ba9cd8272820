#pragma once

#include <array>
#include <set>
#include <vector>

#include "blocks/rgca.hpp"
#include "blocks/vss.hpp"
#include "model/model_config.hpp"

namespace gcrp {

// Saliency predictions from the four decoder stages, each resized to the
// input resolution. maps[0] comes from the finest stage and is the primary
// output; the deeper maps supervise intermediate stages during training.
template <typename T>
struct SaliencyOutputs {
    std::array<Tensor<T>, 4> maps;
};

template <typename T>
struct PatchEmbed {
    Conv2dLayer<T> conv1, conv2;  // 3x3 stride 1, both to C/2
    ChannelLN<T> ln1, ln2;

    static PatchEmbed create(int64_t c_half, Rng& rng) {
        PatchEmbed p;
        p.conv1 = Conv2dLayer<T>::create(3, c_half, 3, 1, 1, rng);
        p.ln1 = ChannelLN<T>::create(c_half);
        p.conv2 = Conv2dLayer<T>::create(c_half, c_half, 3, 1, 1, rng);
        p.ln2 = ChannelLN<T>::create(c_half);
        return p;
    }

    Tensor<T> operator()(const Tensor<T>& x) const {
        return silu(ln2(conv2(silu(ln1(conv1(x))))));
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        conv1.collect(prefix + ".conv1", out);
        ln1.collect(prefix + ".ln1", out);
        conv2.collect(prefix + ".conv2", out);
        ln2.collect(prefix + ".ln2", out);
    }
};

template <typename T>
struct EncStage {
    Conv2dLayer<T> down;  // 3x3 stride 2
    std::vector<VssBlock<T>> blocks;

    Tensor<T> operator()(const Tensor<T>& x) const {
        Tensor<T> y = down(x);
        for (const auto& b : blocks) y = b(y);
        return y;
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        down.collect(prefix + ".down", out);
        for (size_t i = 0; i < blocks.size(); ++i) {
            blocks[i].collect(prefix + ".block" + std::to_string(i + 1), out);
        }
    }
};

template <typename T>
struct DecStage {
    Conv2dLayer<T> fuse;  // 1x1 over the upsampled-deeper + skip concat
    bool has_fuse = false;
    std::vector<VssBlock<T>> blocks;
    Conv2dLayer<T> head;  // 1x1 to a single saliency channel

    Tensor<T> run_blocks(const Tensor<T>& x) const {
        Tensor<T> y = x;
        for (const auto& b : blocks) y = b(y);
        return y;
    }

    void collect(const std::string& prefix, ParamList<T>& out) const {
        if (has_fuse) fuse.collect(prefix + ".fuse", out);
        for (size_t i = 0; i < blocks.size(); ++i) {
            blocks[i].collect(prefix + ".block" + std::to_string(i + 1), out);
        }
        head.collect(prefix + ".head", out);
    }
};

// Encoder-decoder saliency network: a convolutional stem, four downsampling
// stages of selective-scan blocks, graph-enhanced skip refinement, and a
// decoder whose stages scan block-partitioned at finer resolutions and carry
// the local multi-kernel enhancement. Construction order is fixed, so a given
// config and seed always yields the same parameter layout and values.
template <typename T>
class GcrpNet {
  public:
    explicit GcrpNet(const ModelConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        Rng rng(cfg_.seed);
        const int64_t c = cfg_.base_channels;
        const int64_t s = cfg_.input_size;
        const std::array<int64_t, 4> ch{c, 2 * c, 4 * c, 8 * c};
        const std::array<int64_t, 4> dims{s / 2, s / 4, s / 8, s / 16};
        // Scale denominators relative to the input, per stage.
        const std::array<int64_t, 4> denom{2, 4, 8, 16};

        embed_ = PatchEmbed<T>::create(c / 2, rng);

        int64_t prev = c / 2;
        for (int i = 0; i < 4; ++i) {
            auto& st = enc_[static_cast<size_t>(i)];
            st.down = Conv2dLayer<T>::create(prev, ch[static_cast<size_t>(i)], 3, 2, 1, rng);
            for (int d = 0; d < cfg_.enc_depths[static_cast<size_t>(i)]; ++d) {
                st.blocks.push_back(VssBlock<T>::create(ch[static_cast<size_t>(i)], cfg_.state_dim,
                                                        dims[static_cast<size_t>(i)],
                                                        dims[static_cast<size_t>(i)], 1, false, rng));
            }
            prev = ch[static_cast<size_t>(i)];
        }

        if (cfg_.use_dshgam) {
            skip_ = std::make_unique<DsHgam<T>>(
                DsHgam<T>::create(ch, dims, cfg_.gat_connectivity, rng));
        }

        // Deepest decoder stage first: it consumes the deepest skip directly,
        // the others fuse an upsampled deeper output with their skip.
        for (int i = 3; i >= 0; --i) {
            auto& st = dec_[static_cast<size_t>(i)];
            if (i < 3) {
                const int64_t in_c = ch[static_cast<size_t>(i) + 1] + ch[static_cast<size_t>(i)];
                st.fuse = Conv2dLayer<T>::create(in_c, ch[static_cast<size_t>(i)], 1, 1, 0, rng);
                st.has_fuse = true;
            }
            const int64_t grid =
                cfg_.use_less2d ? resolution_to_grid(denom[static_cast<size_t>(i)]) : 1;
            for (int d = 0; d < cfg_.dec_depths[static_cast<size_t>(i)]; ++d) {
                st.blocks.push_back(VssBlock<T>::create(ch[static_cast<size_t>(i)], cfg_.state_dim,
                                                        dims[static_cast<size_t>(i)],
                                                        dims[static_cast<size_t>(i)], grid,
                                                        cfg_.use_mcaem, rng));
            }
            st.head = Conv2dLayer<T>::create(ch[static_cast<size_t>(i)], 1, 1, 1, 0, rng);
        }
    }

    GcrpNet(GcrpNet&&) noexcept = default;
    GcrpNet& operator=(GcrpNet&&) noexcept = default;

    const ModelConfig& config() const { return cfg_; }

    SaliencyOutputs<T> forward(const Tensor<T>& x) const {
        if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) != cfg_.input_size ||
            x.dim(3) != cfg_.input_size) {
            throw ValidationError("expected [B,3," + std::to_string(cfg_.input_size) + "," +
                                  std::to_string(cfg_.input_size) + "] input, got " +
                                  shape_str(x.shape()));
        }
        Tensor<T> e = embed_(x);
        std::array<Tensor<T>, 4> feats;
        Tensor<T> cur = e;
        for (int i = 0; i < 4; ++i) {
            cur = enc_[static_cast<size_t>(i)](cur);
            feats[static_cast<size_t>(i)] = cur;
        }
        std::array<Tensor<T>, 4> skips = skip_ ? (*skip_)(feats) : feats;

        SaliencyOutputs<T> out;
        Tensor<T> deeper;
        for (int i = 3; i >= 0; --i) {
            const auto& st = dec_[static_cast<size_t>(i)];
            Tensor<T> in = skips[static_cast<size_t>(i)];
            if (st.has_fuse) {
                Tensor<T> up = resize_bilinear(deeper, in.dim(2), in.dim(3));
                in = st.fuse(concat<T>({up, in}, 1));
            }
            deeper = st.run_blocks(in);
            Tensor<T> p = sigmoid(st.head(deeper));
            out.maps[static_cast<size_t>(i)] = resize_bilinear(p, cfg_.input_size, cfg_.input_size);
        }
        return out;
    }

    ParamList<T> params() const {
        ParamList<T> out;
        embed_.collect("embed", out);
        for (int i = 0; i < 4; ++i) {
            enc_[static_cast<size_t>(i)].collect("enc" + std::to_string(i + 1), out);
        }
        if (skip_) skip_->collect("skip", out);
        for (int i = 0; i < 4; ++i) {
            dec_[static_cast<size_t>(i)].collect("dec" + std::to_string(i + 1), out);
        }
        std::set<std::string> seen;
        for (const auto& p : out) {
            if (!seen.insert(p.name).second) {
                throw ValidationError("duplicate parameter name: " + p.name);
            }
        }
        return out;
    }

    int64_t param_count() const {
        int64_t n = 0;
        for (const auto& p : params()) n += p.tensor.numel();
        return n;
    }

  private:
    ModelConfig cfg_;
    PatchEmbed<T> embed_;
    std::array<EncStage<T>, 4> enc_;
    std::unique_ptr<DsHgam<T>> skip_;
    std::array<DecStage<T>, 4> dec_;
};

}  // namespace gcrp
