#include "pushgrasp/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pg {

namespace {

constexpr double kDegenerateVar = 1e-12;
constexpr double kRunningMomentum = 0.01;

Tensor pad_input(const Tensor& input, int pad) {
    if (pad == 0) return input;
    int c = input.shape[0], h = input.shape[1], w = input.shape[2];
    Tensor out({c, h + 2 * pad, w + 2 * pad});
    for (int ic = 0; ic < c; ++ic) {
        for (int y = 0; y < h; ++y) {
            std::memcpy(&out.at3(ic, y + pad, pad), &input.at3(ic, y, 0),
                        static_cast<size_t>(w) * sizeof(double));
        }
    }
    return out;
}

void check_conv_shapes(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (input.shape.size() != 3 || weights.shape.size() != 4 || bias.shape.size() != 1)
        throw std::invalid_argument("conv2d: bad tensor ranks");
    if (weights.shape[1] != input.shape[0])
        throw std::invalid_argument("conv2d: channel mismatch");
    if (bias.shape[0] != weights.shape[0])
        throw std::invalid_argument("conv2d: bias size mismatch");
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
              int pad) {
    check_conv_shapes(input, weights, bias);
    int ic_n = input.shape[0], h = input.shape[1], w = input.shape[2];
    int oc_n = weights.shape[0], kh = weights.shape[2], kw = weights.shape[3];
    int oh = (h + 2 * pad - kh) / stride + 1;
    int ow = (w + 2 * pad - kw) / stride + 1;
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: empty output");

    Tensor padded = pad_input(input, pad);
    Tensor out({oc_n, oh, ow});

    for (int oc = 0; oc < oc_n; ++oc) {
        double* out_plane = &out.at3(oc, 0, 0);
        double b = bias[static_cast<size_t>(oc)];
        for (long i = 0; i < static_cast<long>(oh) * ow; ++i) out_plane[i] = b;
        for (int ic = 0; ic < ic_n; ++ic) {
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    double wv = weights.data[((static_cast<size_t>(oc) * ic_n + ic) * kh + ky) *
                                                 kw +
                                             kx];
                    for (int oy = 0; oy < oh; ++oy) {
                        const double* in_row = &padded.at3(ic, oy * stride + ky, kx);
                        double* out_row = out_plane + static_cast<size_t>(oy) * ow;
                        if (stride == 1) {
                            for (int ox = 0; ox < ow; ++ox) out_row[ox] += wv * in_row[ox];
                        } else {
                            for (int ox = 0; ox < ow; ++ox)
                                out_row[ox] += wv * in_row[static_cast<size_t>(ox) * stride];
                        }
                    }
                }
            }
        }
    }
    require_finite(out, "conv2d");
    return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, int stride, int pad,
                          const Tensor& dout) {
    int ic_n = input.shape[0], h = input.shape[1], w = input.shape[2];
    int oc_n = weights.shape[0], kh = weights.shape[2], kw = weights.shape[3];
    int oh = dout.shape[1], ow = dout.shape[2];

    Tensor padded = pad_input(input, pad);
    Tensor dpadded({ic_n, h + 2 * pad, w + 2 * pad});
    ConvGrads g;
    g.dweights = Tensor(weights.shape);
    g.dbias = Tensor({oc_n});

    for (int oc = 0; oc < oc_n; ++oc) {
        const double* dout_plane = &dout.at3(oc, 0, 0);
        double acc_b = 0.0;
        for (long i = 0; i < static_cast<long>(oh) * ow; ++i) acc_b += dout_plane[i];
        g.dbias[static_cast<size_t>(oc)] = acc_b;
        for (int ic = 0; ic < ic_n; ++ic) {
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    size_t widx = ((static_cast<size_t>(oc) * ic_n + ic) * kh + ky) * kw + kx;
                    double wv = weights.data[widx];
                    double acc_w = 0.0;
                    for (int oy = 0; oy < oh; ++oy) {
                        const double* in_row = &padded.at3(ic, oy * stride + ky, kx);
                        double* din_row = &dpadded.at3(ic, oy * stride + ky, kx);
                        const double* dout_row = dout_plane + static_cast<size_t>(oy) * ow;
                        for (int ox = 0; ox < ow; ++ox) {
                            double d = dout_row[ox];
                            size_t off = static_cast<size_t>(ox) * stride;
                            acc_w += d * in_row[off];
                            din_row[off] += wv * d;
                        }
                    }
                    g.dweights.data[widx] = acc_w;
                }
            }
        }
    }

    if (pad == 0) {
        g.dinput = std::move(dpadded);
    } else {
        g.dinput = Tensor({ic_n, h, w});
        for (int ic = 0; ic < ic_n; ++ic)
            for (int y = 0; y < h; ++y)
                std::memcpy(&g.dinput.at3(ic, y, 0), &dpadded.at3(ic, y + pad, pad),
                            static_cast<size_t>(w) * sizeof(double));
    }
    return g;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.shape);
    for (size_t i = 0; i < input.data.size(); ++i) out.data[i] = std::max(0.0, input.data[i]);
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& dout) {
    Tensor out(input.shape);
    for (size_t i = 0; i < input.data.size(); ++i)
        out.data[i] = input.data[i] > 0.0 ? dout.data[i] : 0.0;
    return out;
}

Tensor channel_norm(const Tensor& input, const Tensor& scale, const Tensor& shift,
                    ChannelNormState& state, NormMode mode, ChannelNormCache* cache) {
    int c_n = input.shape[0];
    long n = static_cast<long>(input.shape[1]) * input.shape[2];
    if (state.seen.numel() != c_n) state.seen = Tensor({c_n});
    Tensor out(input.shape);
    if (cache) {
        cache->xhat = Tensor(input.shape);
        cache->inv_std.assign(static_cast<size_t>(c_n), 0.0);
        cache->degenerate.assign(static_cast<size_t>(c_n), 0);
    }
    for (int c = 0; c < c_n; ++c) {
        const double* x = &input.at3(c, 0, 0);
        double* y = &out.at3(c, 0, 0);
        double mu, var;
        if (mode == NormMode::Eval) {
            mu = state.running_mean[static_cast<size_t>(c)];
            var = state.running_var[static_cast<size_t>(c)];
        } else {
            double s = 0.0, s2 = 0.0;
            for (long i = 0; i < n; ++i) {
                s += x[i];
                s2 += x[i] * x[i];
            }
            mu = s / n;
            var = std::max(0.0, s2 / n - mu * mu);
            if (mode == NormMode::Train && var >= kDegenerateVar) {
                // The first batch initializes the running statistics outright;
                // later batches blend in with the usual momentum.
                double m = state.seen[static_cast<size_t>(c)] != 0.0 ? kRunningMomentum : 1.0;
                state.seen[static_cast<size_t>(c)] = 1.0;
                state.running_mean[static_cast<size_t>(c)] =
                    (1.0 - m) * state.running_mean[static_cast<size_t>(c)] + m * mu;
                state.running_var[static_cast<size_t>(c)] =
                    (1.0 - m) * state.running_var[static_cast<size_t>(c)] + m * var;
            }
        }
        double sc = scale[static_cast<size_t>(c)];
        double sh = shift[static_cast<size_t>(c)];
        if (var < kDegenerateVar) {
            // Flat channel: normalization is undefined, fall back to shift only.
            for (long i = 0; i < n; ++i) y[i] = sh;
            if (cache) cache->degenerate[static_cast<size_t>(c)] = 1;
            continue;
        }
        double inv_std = 1.0 / std::sqrt(var);
        if (cache) cache->inv_std[static_cast<size_t>(c)] = inv_std;
        double* xh = cache ? &cache->xhat.at3(c, 0, 0) : nullptr;
        for (long i = 0; i < n; ++i) {
            double v = (x[i] - mu) * inv_std;
            if (xh) xh[i] = v;
            y[i] = sc * v + sh;
        }
    }
    require_finite(out, "channel_norm");
    return out;
}

ChannelNormGrads channel_norm_backward(const Tensor& scale, const ChannelNormCache& cache,
                                       const Tensor& dout) {
    int c_n = dout.shape[0];
    long n = static_cast<long>(dout.shape[1]) * dout.shape[2];
    ChannelNormGrads g;
    g.dinput = Tensor(dout.shape);
    g.dscale = Tensor({c_n});
    g.dshift = Tensor({c_n});
    for (int c = 0; c < c_n; ++c) {
        const double* dy = &dout.at3(c, 0, 0);
        double sum_dy = 0.0;
        for (long i = 0; i < n; ++i) sum_dy += dy[i];
        g.dshift[static_cast<size_t>(c)] = sum_dy;
        if (cache.degenerate[static_cast<size_t>(c)]) continue;  // dscale = 0, dinput = 0
        const double* xh = &cache.xhat.at3(c, 0, 0);
        double sum_dy_xh = 0.0;
        for (long i = 0; i < n; ++i) sum_dy_xh += dy[i] * xh[i];
        g.dscale[static_cast<size_t>(c)] = sum_dy_xh;
        double* dx = &g.dinput.at3(c, 0, 0);
        double k = scale[static_cast<size_t>(c)] * cache.inv_std[static_cast<size_t>(c)];
        double mean_dy = sum_dy / n;
        double mean_dy_xh = sum_dy_xh / n;
        for (long i = 0; i < n; ++i) dx[i] = k * (dy[i] - mean_dy - xh[i] * mean_dy_xh);
    }
    return g;
}

Tensor bilinear_upsample(const Tensor& input, int factor) {
    if (factor != 2 && factor != 4 && factor != 8)
        throw std::invalid_argument("upsample factor must be 2, 4, or 8");
    int c_n = input.shape[0], h = input.shape[1], w = input.shape[2];
    int oh = h * factor, ow = w * factor;
    Tensor out({c_n, oh, ow});
    for (int oy = 0; oy < oh; ++oy) {
        double sy = std::clamp((oy + 0.5) / factor - 0.5, 0.0, h - 1.0);
        int r0 = static_cast<int>(std::floor(sy));
        int r1 = std::min(r0 + 1, h - 1);
        double ay = sy - r0;
        for (int ox = 0; ox < ow; ++ox) {
            double sx = std::clamp((ox + 0.5) / factor - 0.5, 0.0, w - 1.0);
            int c0 = static_cast<int>(std::floor(sx));
            int c1 = std::min(c0 + 1, w - 1);
            double ax = sx - c0;
            for (int c = 0; c < c_n; ++c) {
                double v = (1 - ay) * ((1 - ax) * input.at3(c, r0, c0) + ax * input.at3(c, r0, c1)) +
                           ay * ((1 - ax) * input.at3(c, r1, c0) + ax * input.at3(c, r1, c1));
                out.at3(c, oy, ox) = v;
            }
        }
    }
    return out;
}

Tensor bilinear_upsample_backward(const Tensor& dout, int factor, int in_h, int in_w) {
    int c_n = dout.shape[0], oh = dout.shape[1], ow = dout.shape[2];
    Tensor din({c_n, in_h, in_w});
    for (int oy = 0; oy < oh; ++oy) {
        double sy = std::clamp((oy + 0.5) / factor - 0.5, 0.0, in_h - 1.0);
        int r0 = static_cast<int>(std::floor(sy));
        int r1 = std::min(r0 + 1, in_h - 1);
        double ay = sy - r0;
        for (int ox = 0; ox < ow; ++ox) {
            double sx = std::clamp((ox + 0.5) / factor - 0.5, 0.0, in_w - 1.0);
            int c0 = static_cast<int>(std::floor(sx));
            int c1 = std::min(c0 + 1, in_w - 1);
            double ax = sx - c0;
            for (int c = 0; c < c_n; ++c) {
                double d = dout.at3(c, oy, ox);
                din.at3(c, r0, c0) += (1 - ay) * (1 - ax) * d;
                din.at3(c, r0, c1) += (1 - ay) * ax * d;
                din.at3(c, r1, c0) += ay * (1 - ax) * d;
                din.at3(c, r1, c1) += ay * ax * d;
            }
        }
    }
    return din;
}

double huber(double q_pred, double y_target, double* dloss_dq) {
    double delta = q_pred - y_target;
    double ad = std::abs(delta);
    if (ad < 1.0) {
        if (dloss_dq) *dloss_dq = delta;
        return 0.5 * delta * delta;
    }
    if (dloss_dq) *dloss_dq = delta > 0.0 ? 1.0 : -1.0;
    return ad - 0.5;
}

void OptimizerState::match(const std::vector<const Tensor*>& params) {
    velocity.clear();
    velocity.reserve(params.size());
    for (const Tensor* p : params) velocity.emplace_back(p->shape);
}

void OptimizerState::serialize(std::ostream& os) const {
    write_u64(os, velocity.size());
    for (const auto& t : velocity) write_tensor(os, t);
}

void OptimizerState::deserialize(std::istream& is) {
    velocity.resize(read_u64(is));
    for (auto& t : velocity) read_tensor(is, t);
}

void sgd_momentum_step(const std::vector<Tensor*>& params,
                       const std::vector<const Tensor*>& grads, OptimizerState& state,
                       const SgdConfig& cfg, double lr_override) {
    if (params.size() != grads.size() || params.size() != state.velocity.size())
        throw std::invalid_argument("optimizer state does not match parameters");
    double lr = lr_override > 0.0 ? lr_override : cfg.learning_rate;
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& theta = *params[i];
        const Tensor& g = *grads[i];
        Tensor& v = state.velocity[i];
        if (!theta.same_shape(g) || !theta.same_shape(v))
            throw std::invalid_argument("gradient shape mismatch");
        for (size_t j = 0; j < theta.data.size(); ++j) {
            v.data[j] = cfg.momentum * v.data[j] + g.data[j] + cfg.weight_decay * theta.data[j];
            theta.data[j] -= lr * v.data[j];
        }
    }
}

// ---- FcnModel ----

FcnModel FcnModel::make_default(int in_channels, uint64_t seed) {
    FcnModel m;
    m.in_channels_ = in_channels;
    m.upsample_factor_ = 2;

    auto add_conv = [&](int in_c, int out_c, int k, int stride, int pad) {
        ConvLayer layer;
        layer.in_c = in_c;
        layer.out_c = out_c;
        layer.kh = layer.kw = k;
        layer.stride = stride;
        layer.pad = pad;
        layer.weights = Tensor({out_c, in_c, k, k});
        layer.bias = Tensor({out_c});
        m.convs_.push_back(std::move(layer));
    };
    add_conv(in_channels, 16, 5, 2, 2);
    add_conv(16, 32, 3, 1, 1);
    add_conv(32, 64, 3, 1, 1);
    add_conv(64, 1, 1, 1, 0);

    auto add_norm = [&](int channels) {
        NormLayer layer;
        layer.scale = Tensor({channels});
        layer.shift = Tensor({channels});
        for (auto& v : layer.scale.data) v = 1.0;
        layer.state.running_mean = Tensor({channels});
        layer.state.running_var = Tensor({channels});
        layer.state.seen = Tensor({channels});
        for (auto& v : layer.state.running_var.data) v = 1.0;
        m.norms_.push_back(std::move(layer));
    };
    add_norm(16);
    add_norm(32);

    Rng rng(seed);
    for (auto& conv : m.convs_) {
        double fan_in = static_cast<double>(conv.in_c) * conv.kh * conv.kw;
        double fan_out = static_cast<double>(conv.out_c) * conv.kh * conv.kw;
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& w : conv.weights.data) w = rng.uniform(-limit, limit);
    }
    return m;
}

Tensor FcnModel::forward(const Tensor& input, NormMode mode, ForwardCache* cache) {
    if (input.shape.size() != 3 || input.shape[0] != in_channels_)
        throw std::invalid_argument("fcn forward: wrong input channels");
    if (input.shape[1] % upsample_factor_ != 0 || input.shape[2] % upsample_factor_ != 0)
        throw std::invalid_argument("fcn forward: spatial dims must divide the upsample factor");
    if (cache) {
        cache->input = input;
        cache->conv_in.clear();
        cache->pre_relu.clear();
        cache->norm_caches.assign(norms_.size(), {});
    }

    Tensor x = input;
    // conv0 - norm0 - relu
    if (cache) cache->conv_in.push_back(x);
    x = conv2d(x, convs_[0].weights, convs_[0].bias, convs_[0].stride, convs_[0].pad);
    x = channel_norm(x, norms_[0].scale, norms_[0].shift, norms_[0].state, mode,
                     cache ? &cache->norm_caches[0] : nullptr);
    if (cache) cache->pre_relu.push_back(x);
    x = relu(x);
    // conv1 - norm1 - relu
    if (cache) cache->conv_in.push_back(x);
    x = conv2d(x, convs_[1].weights, convs_[1].bias, convs_[1].stride, convs_[1].pad);
    x = channel_norm(x, norms_[1].scale, norms_[1].shift, norms_[1].state, mode,
                     cache ? &cache->norm_caches[1] : nullptr);
    if (cache) cache->pre_relu.push_back(x);
    x = relu(x);
    // conv2 - relu
    if (cache) cache->conv_in.push_back(x);
    x = conv2d(x, convs_[2].weights, convs_[2].bias, convs_[2].stride, convs_[2].pad);
    if (cache) cache->pre_relu.push_back(x);
    x = relu(x);
    // conv3 (1x1 head)
    if (cache) cache->conv_in.push_back(x);
    x = conv2d(x, convs_[3].weights, convs_[3].bias, convs_[3].stride, convs_[3].pad);
    if (cache) cache->pre_upsample = x;
    x = bilinear_upsample(x, upsample_factor_);
    require_finite(x, "fcn output");
    if (cache) cache->output = x;
    return x;
}

std::vector<Tensor> FcnModel::backward(const ForwardCache& cache, const Tensor& d_output) const {
    std::vector<Tensor> grads(parameters().size());
    Tensor d = d_output;
    d = bilinear_upsample_backward(d, upsample_factor_, cache.pre_upsample.shape[1],
                                   cache.pre_upsample.shape[2]);

    // Parameter order: conv0 w,b, norm0 scale,shift, conv1 w,b, norm1 scale,shift,
    // conv2 w,b, conv3 w,b  (matches parameters()).
    auto conv_back = [&](int conv_idx, int grad_base, const Tensor& din) {
        ConvGrads g = conv2d_backward(cache.conv_in[static_cast<size_t>(conv_idx)],
                                      convs_[static_cast<size_t>(conv_idx)].weights,
                                      convs_[static_cast<size_t>(conv_idx)].stride,
                                      convs_[static_cast<size_t>(conv_idx)].pad, din);
        grads[static_cast<size_t>(grad_base)] = std::move(g.dweights);
        grads[static_cast<size_t>(grad_base) + 1] = std::move(g.dbias);
        return std::move(g.dinput);
    };

    d = conv_back(3, 10, d);
    d = relu_backward(cache.pre_relu[2], d);
    d = conv_back(2, 8, d);
    d = relu_backward(cache.pre_relu[1], d);
    {
        ChannelNormGrads g = channel_norm_backward(norms_[1].scale, cache.norm_caches[1], d);
        grads[6] = std::move(g.dscale);
        grads[7] = std::move(g.dshift);
        d = std::move(g.dinput);
    }
    d = conv_back(1, 4, d);
    d = relu_backward(cache.pre_relu[0], d);
    {
        ChannelNormGrads g = channel_norm_backward(norms_[0].scale, cache.norm_caches[0], d);
        grads[2] = std::move(g.dscale);
        grads[3] = std::move(g.dshift);
        d = std::move(g.dinput);
    }
    conv_back(0, 0, d);
    return grads;
}

std::vector<Tensor*> FcnModel::parameters() {
    return {&convs_[0].weights, &convs_[0].bias, &norms_[0].scale, &norms_[0].shift,
            &convs_[1].weights, &convs_[1].bias, &norms_[1].scale, &norms_[1].shift,
            &convs_[2].weights, &convs_[2].bias, &convs_[3].weights, &convs_[3].bias};
}

std::vector<const Tensor*> FcnModel::parameters() const {
    return {&convs_[0].weights, &convs_[0].bias, &norms_[0].scale, &norms_[0].shift,
            &convs_[1].weights, &convs_[1].bias, &norms_[1].scale, &norms_[1].shift,
            &convs_[2].weights, &convs_[2].bias, &convs_[3].weights, &convs_[3].bias};
}

long FcnModel::parameter_count() const {
    long n = 0;
    for (const Tensor* t : parameters()) n += t->numel();
    return n;
}

void FcnModel::serialize(std::ostream& os) const {
    write_u64(os, static_cast<uint64_t>(in_channels_));
    write_u64(os, static_cast<uint64_t>(upsample_factor_));
    for (const Tensor* t : parameters()) write_tensor(os, *t);
    for (const auto& norm : norms_) {
        write_tensor(os, norm.state.running_mean);
        write_tensor(os, norm.state.running_var);
        write_tensor(os, norm.state.seen);
    }
}

void FcnModel::deserialize(std::istream& is) {
    int in_c = static_cast<int>(read_u64(is));
    int up = static_cast<int>(read_u64(is));
    *this = make_default(in_c, 0);
    upsample_factor_ = up;
    for (Tensor* t : parameters()) read_tensor(is, *t);
    for (auto& norm : norms_) {
        read_tensor(is, norm.state.running_mean);
        read_tensor(is, norm.state.running_var);
        read_tensor(is, norm.state.seen);
    }
}

void FcnModel::copy_state_from(const FcnModel& other) {
    in_channels_ = other.in_channels_;
    upsample_factor_ = other.upsample_factor_;
    convs_ = other.convs_;
    norms_ = other.norms_;
}

double gradient_check(FcnModel& model, const Tensor& input, int pixel_row, int pixel_col,
                      double y_target, uint64_t seed, int max_probes) {
    FcnModel::ForwardCache cache;
    Tensor out = model.forward(input, NormMode::Infer, &cache);
    double dq;
    huber(out.at3(0, pixel_row, pixel_col), y_target, &dq);
    Tensor d_out(out.shape);
    d_out.at3(0, pixel_row, pixel_col) = dq;
    std::vector<Tensor> analytic = model.backward(cache, d_out);

    auto loss_now = [&]() {
        Tensor o = model.forward(input, NormMode::Infer);
        return huber(o.at3(0, pixel_row, pixel_col), y_target, nullptr);
    };

    std::vector<Tensor*> params = model.parameters();
    long total = model.parameter_count();
    Rng rng(seed);
    const double h = 1e-4;
    double max_err = 0.0;
    int probes = std::min<long>(max_probes, total);
    for (int probe = 0; probe < probes; ++probe) {
        long flat = static_cast<long>(rng.below(static_cast<uint64_t>(total)));
        size_t pi = 0;
        while (flat >= params[pi]->numel()) {
            flat -= params[pi]->numel();
            ++pi;
        }
        double* slot = &params[pi]->data[static_cast<size_t>(flat)];
        double saved = *slot;
        *slot = saved + h;
        double lp = loss_now();
        *slot = saved - h;
        double lm = loss_now();
        *slot = saved;
        double fd = (lp - lm) / (2.0 * h);
        double a = analytic[pi].data[static_cast<size_t>(flat)];
        double err = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
        max_err = std::max(max_err, err);
    }
    return max_err;
}

// ---- serialization helpers ----

void write_u64(std::ostream& os, uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint64_t read_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("truncated stream");
    return v;
}

void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("truncated stream");
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<long>(s.size()));
}

std::string read_string(std::istream& is) {
    std::string s(read_u64(is), '\0');
    is.read(s.data(), static_cast<long>(s.size()));
    if (!is) throw std::runtime_error("truncated stream");
    return s;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    write_u64(os, t.shape.size());
    for (int d : t.shape) write_u64(os, static_cast<uint64_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<long>(t.data.size() * sizeof(double)));
}

void read_tensor(std::istream& is, Tensor& t) {
    std::vector<int> shape(read_u64(is));
    for (auto& d : shape) d = static_cast<int>(read_u64(is));
    t = Tensor(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<long>(t.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated tensor");
}

}  // namespace pg
