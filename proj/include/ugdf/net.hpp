#pragma once

#include <map>

#include "ugdf/adam.hpp"
#include "ugdf/io.hpp"
#include "ugdf/ops.hpp"
#include "ugdf/spike_sim.hpp"

namespace ugdf::net {

struct NetConfig {
  int base_channels = 32;      // unary feature channels C
  int max_disp = 16;           // disparity levels at 1/8 resolution
  int hourglass_count = 3;     // M
  int window_width = 24;       // n
  int fft_k = 8;
  int hidden_rnn_channels = 8;
  int encode_channels = 16;    // channels after the RNN/FFT merge
  int hourglass_channels = 16;
  double theta = 1.0;          // firing threshold, recorded with the model
  uint32_t seed = 1;
};

template <class T>
struct BranchOutputs {
  Var<T> mono_depth_norm;                // [1,H,W], (0,1)
  Var<T> mono_sigma;                     // [1,H,W], clamped [1e-3, 1-1e-3]
  std::vector<Var<T>> stereo_disp_full;  // M maps [1,H,W], full-res pixels
  Var<T> stereo_disp_eighth;             // last map [1,H/8,W/8]
  Var<T> prob_volume;                    // [D,H/8,W/8], last hourglass
  Var<T> stereo_sigma;                   // [1,H,W]
};

// The dual-branch depth network: neuromorphic encoding (ConvGRU over spike
// windows + temporal frequency features), a shared 3-stage stride-2 encoder,
// a monocular decoder with an uncertainty channel, and a cost-volume stereo
// branch with stacked 3D hourglasses and soft-argmin regression.
template <class T>
class UgdfNet {
 public:
  explicit UgdfNet(const NetConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg.base_channels < 1 || cfg.max_disp < 1 || cfg.hourglass_count < 1 ||
        cfg.window_width < 1 || cfg.fft_k < 1 || cfg.hidden_rnn_channels < 1)
      throw std::invalid_argument("UgdfNet: bad config");
    build();
  }

  const NetConfig& config() const { return cfg_; }

  const std::vector<Var<T>>& parameters() const { return param_list_; }
  const std::vector<std::string>& parameter_names() const { return param_names_; }
  int64_t parameter_count() const {
    int64_t n = 0;
    for (const auto& p : param_list_) n += p->val.size();
    return n;
  }

  // final ConvGRU hidden state over the chunked spike windows
  Var<T> encode_hidden(const spike::SpikeVoxel& voxel) {
    auto windows = spike::chunk_windows(voxel, cfg_.window_width);
    Var<T> h = make_var<T>(Tensor<T>({cfg_.hidden_rnn_channels, voxel.h, voxel.w}), false);
    for (const auto& win : windows.sequences) {
      Var<T> x = make_var<T>(win.template cast<T>(), false);
      h = gru_step(x, h);
    }
    return h;
  }

  Var<T> gru_step(const Var<T>& x, const Var<T>& h) {
    const int hid = cfg_.hidden_rnn_channels;
    auto gates = ops::conv2d(ops::concat_channels<T>({x, h}), gru_gates_.w, gru_gates_.b, 1, 1);
    auto z = ops::sigmoid(ops::slice_channels(gates, 0, hid));
    auto r = ops::sigmoid(ops::slice_channels(gates, hid, 2 * hid));
    auto cand_in = ops::concat_channels<T>({x, ops::mul(r, h)});
    auto hbar = ops::tanh_op(ops::conv2d(cand_in, gru_cand_.w, gru_cand_.b, 1, 1));
    return ops::add(ops::mul(ops::affine(z, T(-1), T(1)), h), ops::mul(z, hbar));
  }

  // neuromorphic encoding front end; output [encode_channels, H, W]
  Var<T> encode_spikes(const spike::SpikeVoxel& voxel) {
    Var<T> h = encode_hidden(voxel);
    auto fft = spike::temporal_frequency_features(voxel, cfg_.fft_k);
    Var<T> fft_var = make_var<T>(fft.template cast<T>(), false);
    auto merged = ops::concat_channels<T>({h, fft_var});
    return ops::conv2d(merged, merge_.w, merge_.b, 1, 0);
  }

  // shared encoder; [encode_channels,H,W] -> [C, H/8, W/8]
  Var<T> shared_encoder(const Var<T>& x, bool training) {
    if (x->val.shape[1] % 8 || x->val.shape[2] % 8)
      throw std::invalid_argument("shared_encoder: H and W must be divisible by 8");
    Var<T> y = x;
    for (int s = 0; s < 3; ++s) {
      y = conv_bn_mish(y, enc_down_[s], enc_down_bn_[s], 2, training);
      y = residual_block(y, s, training);
    }
    return y;
  }

  Var<T> build_cost_volume(const Var<T>& left, const Var<T>& right) {
    if (cfg_.max_disp > left->val.shape[2])
      throw std::invalid_argument("build_cost_volume: max_disp > W/8");
    return ops::cost_volume(left, right, cfg_.max_disp);
  }

  // M single-channel cost maps over (disparity, h, w)
  std::vector<Var<T>> hourglass_stack(const Var<T>& cv, bool training) {
    Var<T> f = conv3_bn_mish(cv, hg_init_, hg_init_bn_, 1, training);
    std::vector<Var<T>> costs;
    for (int m = 0; m < cfg_.hourglass_count; ++m) {
      f = hourglass(f, m, training);
      auto c = conv3_bn_mish(f, hg_head1_[m], hg_head1_bn_[m], 1, training);
      c = ops::conv3d(c, hg_head2_[m].w, hg_head2_[m].b, 1, 1);  // -> 1 channel
      costs.push_back(ops::reshape(c, {c->val.shape[1], c->val.shape[2], c->val.shape[3]}));
    }
    return costs;
  }

  // soft-argmin: probability = softmax(-costs) over disparity, then
  // expectation; full-res disparity is the x8 bilinear upsample scaled by 8.
  struct SoftArgmin {
    Var<T> disparity_eighth;  // [1,h,w], in [0, max_disp-1]
    Var<T> disparity_full;    // [1,H,W], in [0, 8*(max_disp-1)]
    Var<T> probabilities;     // [D,h,w]
  };
  SoftArgmin soft_argmin(const Var<T>& costs) {
    for (const T v : costs->val.v)
      if (!std::isfinite(static_cast<double>(v)))
        throw std::domain_error("soft_argmin: non-finite cost");
    SoftArgmin out;
    out.probabilities = ops::softmax_over_axis(ops::affine(costs, T(-1), T(0)), 0);
    out.disparity_eighth = ops::disparity_expectation(out.probabilities);
    out.disparity_full = ops::affine(upsample8(out.disparity_eighth), T(8), T(0));
    return out;
  }

  struct MonoOut {
    Var<T> depth_norm;
    Var<T> sigma;
  };
  MonoOut mono_decoder(const Var<T>& right_unary, bool training) {
    Var<T> y = right_unary;
    for (int s = 0; s < 3; ++s) {
      y = ops::bilinear_upsample_2x(y);
      y = conv_bn_mish(y, dec_conv1_[s], dec_conv1_bn_[s], 1, training);
      y = conv_bn_mish(y, dec_conv2_[s], dec_conv2_bn_[s], 1, training);
    }
    auto head = ops::conv2d(y, dec_head_.w, dec_head_.b, 1, 0);
    auto act = ops::sigmoid(head);
    MonoOut out;
    out.depth_norm = ops::clamp(ops::slice_channels(act, 0, 1), T(1e-4), T(1) - T(1e-4));
    out.sigma = ops::clamp(ops::slice_channels(act, 1, 2), T(1e-3), T(1) - T(1e-3));
    return out;
  }

  Var<T> stereo_uncertainty_head(const Var<T>& prob_volume) {
    auto y = ops::mish(ops::conv2d(prob_volume, unc_conv1_.w, unc_conv1_.b, 1, 1));
    y = ops::conv2d(y, unc_conv2_.w, unc_conv2_.b, 1, 1);
    y = ops::clamp(ops::sigmoid(y), T(1e-3), T(1) - T(1e-3));
    return upsample8(y);
  }

  BranchOutputs<T> forward(const spike::SpikeVoxel& left, const spike::SpikeVoxel& right,
                           bool training) {
    auto left_f = shared_encoder(encode_spikes(left), training);
    auto right_f = shared_encoder(encode_spikes(right), training);

    BranchOutputs<T> out;
    auto mono = mono_decoder(right_f, training);
    out.mono_depth_norm = mono.depth_norm;
    out.mono_sigma = mono.sigma;

    auto costs = hourglass_stack(build_cost_volume(left_f, right_f), training);
    for (size_t i = 0; i < costs.size(); ++i) {
      auto sa = soft_argmin(costs[i]);
      out.stereo_disp_full.push_back(sa.disparity_full);
      if (i + 1 == costs.size()) {
        out.stereo_disp_eighth = sa.disparity_eighth;
        out.prob_volume = sa.probabilities;
      }
    }
    out.stereo_sigma = stereo_uncertainty_head(out.prob_volume);
    return out;
  }

  std::vector<std::pair<std::string, Tensor<float>>> state_arrays() const {
    std::vector<std::pair<std::string, Tensor<float>>> out;
    for (size_t i = 0; i < param_list_.size(); ++i)
      out.emplace_back(param_names_[i], param_list_[i]->val.template cast<float>());
    for (size_t i = 0; i < bn_states_.size(); ++i) {
      out.emplace_back(bn_names_[i] + ".running_mean",
                       bn_states_[i]->running_mean.template cast<float>());
      out.emplace_back(bn_names_[i] + ".running_var",
                       bn_states_[i]->running_var.template cast<float>());
    }
    return out;
  }

  void load_state_arrays(const std::vector<std::pair<std::string, Tensor<float>>>& arrays) {
    std::map<std::string, const Tensor<float>*> by_name;
    for (const auto& [name, t] : arrays) by_name[name] = &t;
    auto fetch = [&](const std::string& name, const std::vector<int>& shape) {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw std::runtime_error("checkpoint missing array: " + name);
      if (it->second->shape != shape)
        throw std::runtime_error("checkpoint shape mismatch for " + name + ": file " +
                                 shape_str(it->second->shape) + " vs model " +
                                 shape_str(shape));
      return it->second->template cast<T>();
    };
    for (size_t i = 0; i < param_list_.size(); ++i)
      param_list_[i]->val = fetch(param_names_[i], param_list_[i]->val.shape);
    for (size_t i = 0; i < bn_states_.size(); ++i) {
      bn_states_[i]->running_mean =
          fetch(bn_names_[i] + ".running_mean", bn_states_[i]->running_mean.shape);
      bn_states_[i]->running_var =
          fetch(bn_names_[i] + ".running_var", bn_states_[i]->running_var.shape);
    }
  }

 private:
  struct Conv {
    Var<T> w, b;
  };
  struct Bn {
    Var<T> gamma, beta;
    std::shared_ptr<ops::BatchNormState<T>> state;
  };

  NetConfig cfg_;
  std::mt19937 rng_;
  std::vector<Var<T>> param_list_;
  std::vector<std::string> param_names_;
  std::vector<std::shared_ptr<ops::BatchNormState<T>>> bn_states_;
  std::vector<std::string> bn_names_;

  Conv gru_gates_, gru_cand_, merge_;
  Conv enc_down_[3], enc_res1_[3], enc_res2_[3];
  Bn enc_down_bn_[3], enc_res1_bn_[3], enc_res2_bn_[3];
  Conv dec_conv1_[3], dec_conv2_[3], dec_head_;
  Bn dec_conv1_bn_[3], dec_conv2_bn_[3];
  Conv hg_init_;
  Bn hg_init_bn_;
  std::vector<Conv> hg_down1_, hg_down2_, hg_up1_, hg_up2_, hg_head1_, hg_head2_;
  std::vector<Bn> hg_down1_bn_, hg_down2_bn_, hg_up1_bn_, hg_up2_bn_, hg_head1_bn_;
  Conv unc_conv1_, unc_conv2_;

  Var<T> param(const std::string& name, Tensor<T> t) {
    auto v = make_var<T>(std::move(t), true);
    param_list_.push_back(v);
    param_names_.push_back(name);
    return v;
  }

  Conv make_conv2d(const std::string& name, int cin, int cout, int k) {
    const T std = static_cast<T>(std::sqrt(2.0 / (cin * k * k)));
    return {param(name + ".w", random_normal<T>({cout, cin, k, k}, rng_, std)),
            param(name + ".b", Tensor<T>({cout}))};
  }
  Conv make_conv3d(const std::string& name, int cin, int cout) {
    const T std = static_cast<T>(std::sqrt(2.0 / (cin * 27.0)));
    return {param(name + ".w", random_normal<T>({cout, cin, 3, 3, 3}, rng_, std)),
            param(name + ".b", Tensor<T>({cout}))};
  }
  Conv make_tconv3d(const std::string& name, int cin, int cout) {
    const T std = static_cast<T>(std::sqrt(2.0 / (cin * 27.0)));
    return {param(name + ".w", random_normal<T>({cin, cout, 3, 3, 3}, rng_, std)),
            param(name + ".b", Tensor<T>({cout}))};
  }
  Bn make_bn(const std::string& name, int channels) {
    Bn bn;
    Tensor<T> ones({channels});
    for (auto& v : ones.v) v = T(1);
    bn.gamma = param(name + ".gamma", std::move(ones));
    bn.beta = param(name + ".beta", Tensor<T>({channels}));
    bn.state = std::make_shared<ops::BatchNormState<T>>(channels);
    bn_states_.push_back(bn.state);
    bn_names_.push_back(name);
    return bn;
  }

  void build() {
    const int hid = cfg_.hidden_rnn_channels;
    const int n = cfg_.window_width;
    const int c = cfg_.base_channels;
    const int e = cfg_.encode_channels;
    const int g = cfg_.hourglass_channels;

    gru_gates_ = make_conv2d("encode.gru.gates", n + hid, 2 * hid, 3);
    gru_cand_ = make_conv2d("encode.gru.cand", n + hid, hid, 3);
    merge_ = make_conv2d("encode.merge", hid + cfg_.fft_k, e, 1);

    int cin = e;
    for (int s = 0; s < 3; ++s) {
      const std::string p = "encoder.stage" + std::to_string(s);
      enc_down_[s] = make_conv2d(p + ".down", cin, c, 3);
      enc_down_bn_[s] = make_bn(p + ".down_bn", c);
      enc_res1_[s] = make_conv2d(p + ".res1", c, c, 3);
      enc_res1_bn_[s] = make_bn(p + ".res1_bn", c);
      enc_res2_[s] = make_conv2d(p + ".res2", c, c, 3);
      enc_res2_bn_[s] = make_bn(p + ".res2_bn", c);
      cin = c;
    }

    for (int s = 0; s < 3; ++s) {
      const std::string p = "mono.up" + std::to_string(s);
      dec_conv1_[s] = make_conv2d(p + ".conv1", c, c, 3);
      dec_conv1_bn_[s] = make_bn(p + ".conv1_bn", c);
      dec_conv2_[s] = make_conv2d(p + ".conv2", c, c, 3);
      dec_conv2_bn_[s] = make_bn(p + ".conv2_bn", c);
    }
    dec_head_ = make_conv2d("mono.head", c, 2, 1);

    hg_init_ = make_conv3d("stereo.init", 2 * c, g);
    hg_init_bn_ = make_bn("stereo.init_bn", g);
    for (int m = 0; m < cfg_.hourglass_count; ++m) {
      const std::string p = "stereo.hg" + std::to_string(m);
      hg_down1_.push_back(make_conv3d(p + ".down1", g, 2 * g));
      hg_down1_bn_.push_back(make_bn(p + ".down1_bn", 2 * g));
      hg_down2_.push_back(make_conv3d(p + ".down2", 2 * g, 2 * g));
      hg_down2_bn_.push_back(make_bn(p + ".down2_bn", 2 * g));
      hg_up1_.push_back(make_tconv3d(p + ".up1", 2 * g, 2 * g));
      hg_up1_bn_.push_back(make_bn(p + ".up1_bn", 2 * g));
      hg_up2_.push_back(make_tconv3d(p + ".up2", 2 * g, g));
      hg_up2_bn_.push_back(make_bn(p + ".up2_bn", g));
      hg_head1_.push_back(make_conv3d(p + ".head1", g, g));
      hg_head1_bn_.push_back(make_bn(p + ".head1_bn", g));
      hg_head2_.push_back(make_conv3d(p + ".head2", g, 1));
    }

    unc_conv1_ = make_conv2d("stereo.unc.conv1", cfg_.max_disp, 8, 3);
    unc_conv2_ = make_conv2d("stereo.unc.conv2", 8, 1, 3);
  }

  Var<T> conv_bn_mish(const Var<T>& x, const Conv& cv, Bn& bn, int stride, bool training) {
    auto y = ops::conv2d(x, cv.w, cv.b, stride, 1);
    y = ops::batch_norm(y, bn.gamma, bn.beta, *bn.state, training);
    return ops::mish(y);
  }
  Var<T> conv3_bn_mish(const Var<T>& x, const Conv& cv, Bn& bn, int stride, bool training) {
    auto y = ops::conv3d(x, cv.w, cv.b, stride, 1);
    y = ops::batch_norm(y, bn.gamma, bn.beta, *bn.state, training);
    return ops::mish(y);
  }

  Var<T> residual_block(const Var<T>& x, int s, bool training) {
    auto y = conv_bn_mish(x, enc_res1_[s], enc_res1_bn_[s], 1, training);
    y = ops::conv2d(y, enc_res2_[s].w, enc_res2_[s].b, 1, 1);
    y = ops::batch_norm(y, enc_res2_bn_[s].gamma, enc_res2_bn_[s].beta,
                        *enc_res2_bn_[s].state, training);
    return ops::mish(ops::add(y, x));
  }

  Var<T> hourglass(const Var<T>& x, int m, bool training) {
    const auto in_shape = x->val.shape;
    auto d1 = conv3_bn_mish(x, hg_down1_[m], hg_down1_bn_[m], 2, training);
    const auto d1_shape = d1->val.shape;
    auto d2 = conv3_bn_mish(d1, hg_down2_[m], hg_down2_bn_[m], 2, training);
    auto u1 = ops::transposed_conv3d(d2, hg_up1_[m].w, hg_up1_[m].b,
                                     {d1_shape[1], d1_shape[2], d1_shape[3]});
    u1 = ops::batch_norm(u1, hg_up1_bn_[m].gamma, hg_up1_bn_[m].beta, *hg_up1_bn_[m].state,
                         training);
    u1 = ops::mish(ops::add(u1, d1));
    auto u2 = ops::transposed_conv3d(u1, hg_up2_[m].w, hg_up2_[m].b,
                                     {in_shape[1], in_shape[2], in_shape[3]});
    u2 = ops::batch_norm(u2, hg_up2_bn_[m].gamma, hg_up2_bn_[m].beta, *hg_up2_bn_[m].state,
                         training);
    return ops::mish(ops::add(u2, x));
  }

  Var<T> upsample8(const Var<T>& x) {
    return ops::bilinear_upsample_2x(
        ops::bilinear_upsample_2x(ops::bilinear_upsample_2x(x)));
  }
};

}  // namespace ugdf::net
