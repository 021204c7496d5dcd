#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pushgrasp/rng.hpp"
#include "pushgrasp/tensor.hpp"

namespace pg {

// ---- dense ops (all tensors are (C, H, W)) ----

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
              int pad);

struct ConvGrads {
    Tensor dinput;
    Tensor dweights;
    Tensor dbias;
};
ConvGrads conv2d_backward(const Tensor& input, const Tensor& weights, int stride, int pad,
                          const Tensor& dout);

Tensor relu(const Tensor& input);
Tensor relu_backward(const Tensor& input, const Tensor& dout);

/// Spatial normalization over the single map (batch of one).
/// Train: batch statistics, running stats updated with momentum 0.01.
/// Infer: batch statistics, running stats untouched (action selection).
/// Eval:  frozen running statistics.
/// Channels with spatial variance < 1e-12 fall back to shift-only output.
enum class NormMode { Train, Infer, Eval };

struct ChannelNormState {
    Tensor running_mean;
    Tensor running_var;
    Tensor seen;  // per channel: 1 once the first batch initialized the stats
};

struct ChannelNormCache {
    Tensor xhat;
    std::vector<double> inv_std;
    std::vector<char> degenerate;
};

Tensor channel_norm(const Tensor& input, const Tensor& scale, const Tensor& shift,
                    ChannelNormState& state, NormMode mode, ChannelNormCache* cache = nullptr);

struct ChannelNormGrads {
    Tensor dinput;
    Tensor dscale;
    Tensor dshift;
};
ChannelNormGrads channel_norm_backward(const Tensor& scale, const ChannelNormCache& cache,
                                       const Tensor& dout);

/// Align-corners-false bilinear upsampling with edge-clamped sampling.
Tensor bilinear_upsample(const Tensor& input, int factor);
/// Exact adjoint of bilinear_upsample.
Tensor bilinear_upsample_backward(const Tensor& dout, int factor, int in_h, int in_w);

/// Huber loss at the unit knee. Returns the loss; *dloss_dq gets the
/// derivative w.r.t. q_pred, clamped to [-1, 1].
double huber(double q_pred, double y_target, double* dloss_dq);

// ---- optimizer ----

struct SgdConfig {
    double learning_rate = 1e-4;
    double momentum = 0.9;
    double weight_decay = 0.03125;  // 2^-5
};

struct OptimizerState {
    std::vector<Tensor> velocity;

    void match(const std::vector<const Tensor*>& params);
    void serialize(std::ostream& os) const;
    void deserialize(std::istream& is);
};

/// v <- mu*v + g + lambda*theta; theta <- theta - lr*v.
void sgd_momentum_step(const std::vector<Tensor*>& params,
                       const std::vector<const Tensor*>& grads, OptimizerState& state,
                       const SgdConfig& cfg, double lr_override = -1.0);

// ---- the compact fully convolutional trunk ----

/// conv 5x5x16 /2 - norm - relu - conv 3x3x32 - norm - relu -
/// conv 3x3x64 - relu - conv 1x1x1 - bilinear upsample x2.
/// Maps (C, H, W) input to a (1, H, W) score map; H and W must be even.
class FcnModel {
public:
    struct ConvLayer {
        int in_c, out_c, kh, kw, stride, pad;
        Tensor weights;
        Tensor bias;
    };
    struct NormLayer {
        Tensor scale;
        Tensor shift;
        ChannelNormState state;
    };

    struct ForwardCache {
        Tensor input;
        std::vector<Tensor> conv_in;    // input of each conv layer
        std::vector<Tensor> pre_relu;   // activations entering each relu
        std::vector<ChannelNormCache> norm_caches;
        Tensor pre_upsample;
        Tensor output;
    };

    FcnModel() = default;
    static FcnModel make_default(int in_channels, uint64_t seed);

    Tensor forward(const Tensor& input, NormMode mode, ForwardCache* cache = nullptr);

    /// Parameter gradients (aligned with parameters()) for an upstream
    /// gradient on the output map.
    std::vector<Tensor> backward(const ForwardCache& cache, const Tensor& d_output) const;

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    long parameter_count() const;

    int in_channels() const { return in_channels_; }

    void serialize(std::ostream& os) const;
    void deserialize(std::istream& is);

    /// Bitwise parameter + running-stat copy (target network snapshots).
    void copy_state_from(const FcnModel& other);

private:
    int in_channels_ = 0;
    int upsample_factor_ = 2;
    std::vector<ConvLayer> convs_;
    std::vector<NormLayer> norms_;
};

/// Max relative finite-difference error (denominator max(1, |a|, |fd|)) of the
/// single-pixel Huber loss over a deterministic sample of parameters.
double gradient_check(FcnModel& model, const Tensor& input, int pixel_row, int pixel_col,
                      double y_target, uint64_t seed, int max_probes = 150);

// ---- serialization helpers ----

void write_tensor(std::ostream& os, const Tensor& t);
void read_tensor(std::istream& is, Tensor& t);
void write_u64(std::ostream& os, uint64_t v);
uint64_t read_u64(std::istream& is);
void write_f64(std::ostream& os, double v);
double read_f64(std::istream& is);
void write_string(std::ostream& os, const std::string& s);
std::string read_string(std::istream& is);

}  // namespace pg
