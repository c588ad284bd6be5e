#include "cartograf/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"
#include "cartograf/errors.hpp"

namespace cartograf::model {

namespace {
constexpr double kBnEpsilon = 1e-8;
constexpr double kBnMomentum = 0.1;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;
constexpr double kProbFloor = 1e-12;
} // namespace

void ModelConfig::validate() const {
    if (conv_channels.size() != 5)
        throw std::invalid_argument("exactly 5 conv layers required, got " +
                                    std::to_string(conv_channels.size()));
    for (int c : conv_channels)
        if (c < 1) throw std::invalid_argument("conv channel counts must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw std::invalid_argument("kernel_size must be odd and >= 1");
    if (fc_dims.size() != 3)
        throw std::invalid_argument("exactly 3 fully connected layers required, got " +
                                    std::to_string(fc_dims.size()));
    for (int d : fc_dims)
        if (d < 1) throw std::invalid_argument("fc dims must be >= 1");
    if (fc_dims.back() != 2) throw std::invalid_argument("final fc width must be 2");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::invalid_argument("dropout_rate must be in [0,1)");
    if (input_dim < 1 || max_len < 1 || scalar_dim < 0)
        throw std::invalid_argument("bad input shape");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
}

ParameterSet init_model(const ModelConfig& config, uint64_t seed) {
    config.validate();
    ParameterSet p;
    p.config = config;
    Rng rng(seed);

    int in_ch = config.input_dim;
    for (int l = 0; l < 5; ++l) {
        ConvLayer layer;
        layer.in_ch = in_ch;
        layer.out_ch = config.conv_channels[static_cast<size_t>(l)];
        layer.k = config.kernel_size;
        double scale = std::sqrt(2.0 / (static_cast<double>(layer.in_ch) * layer.k));
        layer.kernel.resize(static_cast<size_t>(layer.out_ch) * layer.in_ch * layer.k);
        for (auto& w : layer.kernel) w = rng.normal() * scale;
        layer.bias.assign(static_cast<size_t>(layer.out_ch), 0.0);
        layer.bn_gain.assign(static_cast<size_t>(layer.out_ch), 1.0);
        layer.bn_shift.assign(static_cast<size_t>(layer.out_ch), 0.0);
        layer.bn_mean.assign(static_cast<size_t>(layer.out_ch), 0.0);
        layer.bn_var.assign(static_cast<size_t>(layer.out_ch), 1.0);
        p.conv.push_back(std::move(layer));
        in_ch = config.conv_channels[static_cast<size_t>(l)];
    }

    int fc_in = config.conv_channels.back() + config.scalar_dim;
    for (int l = 0; l < 3; ++l) {
        FcLayer layer;
        layer.in = fc_in;
        layer.out = config.fc_dims[static_cast<size_t>(l)];
        double scale = std::sqrt(2.0 / static_cast<double>(layer.in));
        layer.w.resize(static_cast<size_t>(layer.out) * layer.in);
        for (auto& w : layer.w) w = rng.normal() * scale;
        layer.b.assign(static_cast<size_t>(layer.out), 0.0);
        p.fc.push_back(std::move(layer));
        fc_in = layer.out;
    }
    return p;
}

namespace {

// z[b][o][p] = bias[o] + sum_{i,t} kernel[o][i][t] * x[b][i][p+t-pad]
void conv1d_forward(const ConvLayer& layer, const std::vector<double>& x, int B, int L,
                    std::vector<double>& z) {
    const int pad = layer.k / 2;
    const int Ci = layer.in_ch, Co = layer.out_ch, K = layer.k;
    z.assign(static_cast<size_t>(B) * Co * L, 0.0);
    for (int b = 0; b < B; ++b) {
        const double* xb = x.data() + static_cast<size_t>(b) * Ci * L;
        double* zb = z.data() + static_cast<size_t>(b) * Co * L;
        for (int o = 0; o < Co; ++o) {
            double* zrow = zb + static_cast<size_t>(o) * L;
            const double bias = layer.bias[static_cast<size_t>(o)];
            for (int p = 0; p < L; ++p) zrow[p] = bias;
            for (int i = 0; i < Ci; ++i) {
                const double* xrow = xb + static_cast<size_t>(i) * L;
                const double* krow =
                    layer.kernel.data() + (static_cast<size_t>(o) * Ci + i) * K;
                for (int t = 0; t < K; ++t) {
                    const double w = krow[t];
                    if (w == 0.0) continue;
                    const int shift = t - pad;
                    const int p0 = std::max(0, -shift);
                    const int p1 = std::min(L, L - shift);
                    for (int p = p0; p < p1; ++p) zrow[p] += w * xrow[p + shift];
                }
            }
        }
    }
}

} // namespace

void forward(const ParameterSet& params,
             const std::vector<const features::FeaturizedExample*>& batch, Mode mode,
             Rng* dropout_rng, ForwardTrace& trace) {
    const ModelConfig& cfg = params.config;
    const int B = static_cast<int>(batch.size());
    const int L = cfg.max_len;
    const int D = cfg.input_dim;
    if (B == 0) throw std::invalid_argument("forward: empty batch");
    if (mode == Mode::train && dropout_rng == nullptr && cfg.dropout_rate > 0.0)
        throw std::invalid_argument("forward: train mode needs a dropout rng");

    const size_t cells = static_cast<size_t>(L) * D;
    for (const auto* ex : batch) {
        if (ex->matrix.size() != cells ||
            ex->scalars.size() != static_cast<size_t>(cfg.scalar_dim))
            throw DataError("forward: example " + ex->id + " shape mismatch");
    }

    trace = ForwardTrace{};
    trace.batch = B;
    trace.mode = mode;
    trace.x.resize(5);
    trace.z.resize(5);
    trace.xhat.resize(5);
    trace.mean.resize(5);
    trace.var.resize(5);
    trace.inv_std.resize(5);
    trace.new_bn_mean.resize(5);
    trace.new_bn_var.resize(5);

    // input layout [b][channel][pos]; the stored matrix is [pos][dim]
    trace.x[0].assign(static_cast<size_t>(B) * D * L, 0.0);
    for (int b = 0; b < B; ++b) {
        const auto& m = batch[static_cast<size_t>(b)]->matrix;
        double* xb = trace.x[0].data() + static_cast<size_t>(b) * D * L;
        for (int p = 0; p < L; ++p)
            for (int i = 0; i < D; ++i)
                xb[static_cast<size_t>(i) * L + p] = m[static_cast<size_t>(p) * D + i];
    }

    for (int l = 0; l < 5; ++l) {
        const ConvLayer& layer = params.conv[static_cast<size_t>(l)];
        const int C = layer.out_ch;
        conv1d_forward(layer, trace.x[static_cast<size_t>(l)], B, L, trace.z[static_cast<size_t>(l)]);
        auto& z = trace.z[static_cast<size_t>(l)];
        auto& xhat = trace.xhat[static_cast<size_t>(l)];
        xhat.assign(z.size(), 0.0);
        auto& mean = trace.mean[static_cast<size_t>(l)];
        auto& var = trace.var[static_cast<size_t>(l)];
        auto& inv_std = trace.inv_std[static_cast<size_t>(l)];
        mean.assign(static_cast<size_t>(C), 0.0);
        var.assign(static_cast<size_t>(C), 0.0);
        inv_std.assign(static_cast<size_t>(C), 0.0);

        const double n = static_cast<double>(B) * L;
        if (mode == Mode::train) {
            for (int c = 0; c < C; ++c) {
                double s = 0.0;
                for (int b = 0; b < B; ++b) {
                    const double* zr = z.data() + (static_cast<size_t>(b) * C + c) * L;
                    for (int p = 0; p < L; ++p) s += zr[p];
                }
                mean[static_cast<size_t>(c)] = s / n;
            }
            for (int c = 0; c < C; ++c) {
                double s = 0.0;
                const double mu = mean[static_cast<size_t>(c)];
                for (int b = 0; b < B; ++b) {
                    const double* zr = z.data() + (static_cast<size_t>(b) * C + c) * L;
                    for (int p = 0; p < L; ++p) s += (zr[p] - mu) * (zr[p] - mu);
                }
                var[static_cast<size_t>(c)] = s / n; // population form
            }
            auto& new_mean = trace.new_bn_mean[static_cast<size_t>(l)];
            auto& new_var = trace.new_bn_var[static_cast<size_t>(l)];
            new_mean.resize(static_cast<size_t>(C));
            new_var.resize(static_cast<size_t>(C));
            for (int c = 0; c < C; ++c) {
                new_mean[static_cast<size_t>(c)] =
                    (1.0 - kBnMomentum) * layer.bn_mean[static_cast<size_t>(c)] +
                    kBnMomentum * mean[static_cast<size_t>(c)];
                new_var[static_cast<size_t>(c)] =
                    (1.0 - kBnMomentum) * layer.bn_var[static_cast<size_t>(c)] +
                    kBnMomentum * var[static_cast<size_t>(c)];
            }
        } else {
            for (int c = 0; c < C; ++c) {
                mean[static_cast<size_t>(c)] = layer.bn_mean[static_cast<size_t>(c)];
                var[static_cast<size_t>(c)] = layer.bn_var[static_cast<size_t>(c)];
            }
        }
        for (int c = 0; c < C; ++c)
            inv_std[static_cast<size_t>(c)] = 1.0 / std::sqrt(var[static_cast<size_t>(c)] + kBnEpsilon);

        // normalize, scale/shift, ReLU; the post-ReLU tensor feeds conv l+1
        std::vector<double>& out = (l < 4) ? trace.x[static_cast<size_t>(l) + 1] : trace.stack_out;
        out.assign(z.size(), 0.0);
        for (int b = 0; b < B; ++b) {
            for (int c = 0; c < C; ++c) {
                const size_t base = (static_cast<size_t>(b) * C + c) * L;
                const double mu = mean[static_cast<size_t>(c)];
                const double is = inv_std[static_cast<size_t>(c)];
                const double g = layer.bn_gain[static_cast<size_t>(c)];
                const double s = layer.bn_shift[static_cast<size_t>(c)];
                for (int p = 0; p < L; ++p) {
                    const double xh = (z[base + p] - mu) * is;
                    xhat[base + p] = xh;
                    const double a = g * xh + s;
                    out[base + p] = a > 0.0 ? a : 0.0;
                }
            }
        }
    }

    const int C5 = cfg.conv_channels.back();
    const size_t stack_size = static_cast<size_t>(B) * C5 * L;

    // single dropout after the conv stack, train mode only (inverted scaling)
    const double rate = cfg.dropout_rate;
    if (mode == Mode::train && rate > 0.0) {
        trace.dropout_mask.resize(stack_size);
        const double keep_scale = 1.0 / (1.0 - rate);
        for (size_t i = 0; i < stack_size; ++i)
            trace.dropout_mask[i] = dropout_rng->uniform() < rate ? 0.0 : keep_scale;
    }

    trace.pooled.assign(static_cast<size_t>(B) * C5, 0.0);
    trace.pool_argmax.assign(static_cast<size_t>(B) * C5, 0);
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C5; ++c) {
            const size_t base = (static_cast<size_t>(b) * C5 + c) * L;
            double best = -1e300;
            int best_p = 0;
            for (int p = 0; p < L; ++p) {
                double v = trace.stack_out[base + p];
                if (!trace.dropout_mask.empty()) v *= trace.dropout_mask[base + p];
                if (std::isnan(v)) {
                    best = v;
                    best_p = p;
                    break;
                }
                if (v > best) {
                    best = v;
                    best_p = p;
                }
            }
            trace.pooled[static_cast<size_t>(b) * C5 + c] = best;
            trace.pool_argmax[static_cast<size_t>(b) * C5 + c] = best_p;
        }
    }

    const int V = C5 + cfg.scalar_dim;
    trace.fc_in.assign(static_cast<size_t>(B) * V, 0.0);
    for (int b = 0; b < B; ++b) {
        double* row = trace.fc_in.data() + static_cast<size_t>(b) * V;
        for (int c = 0; c < C5; ++c) row[c] = trace.pooled[static_cast<size_t>(b) * C5 + c];
        const auto& sc = batch[static_cast<size_t>(b)]->scalars;
        for (int s = 0; s < cfg.scalar_dim; ++s) row[C5 + s] = sc[static_cast<size_t>(s)];
    }

    trace.fc_pre.resize(3);
    trace.fc_post.resize(3);
    const std::vector<double>* cur = &trace.fc_in;
    for (int l = 0; l < 3; ++l) {
        const FcLayer& fc = params.fc[static_cast<size_t>(l)];
        auto& pre = trace.fc_pre[static_cast<size_t>(l)];
        pre.assign(static_cast<size_t>(B) * fc.out, 0.0);
        for (int b = 0; b < B; ++b) {
            const double* in = cur->data() + static_cast<size_t>(b) * fc.in;
            double* out = pre.data() + static_cast<size_t>(b) * fc.out;
            for (int o = 0; o < fc.out; ++o) {
                double s = fc.b[static_cast<size_t>(o)];
                const double* wr = fc.w.data() + static_cast<size_t>(o) * fc.in;
                for (int i = 0; i < fc.in; ++i) s += wr[i] * in[i];
                out[o] = s;
            }
        }
        auto& post = trace.fc_post[static_cast<size_t>(l)];
        if (l < 2) {
            post = pre;
            for (auto& v : post) v = v > 0.0 ? v : 0.0;
        } else {
            post = pre; // logits, no activation
        }
        cur = &post;
    }

    trace.logits = trace.fc_post[2];
    for (double v : trace.logits)
        if (!std::isfinite(v)) throw DivergenceError("non-finite activation in forward pass");
}

std::array<double, 2> softmax2(double l0, double l1) {
    const double m = std::max(l0, l1);
    const double e0 = std::exp(l0 - m);
    const double e1 = std::exp(l1 - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

double cross_entropy(const std::array<double, 2>& probs, int gold) {
    return -std::log(std::max(probs[static_cast<size_t>(gold)], kProbFloor));
}

GradientSet make_gradients(const ParameterSet& params) {
    GradientSet g;
    for (const auto& layer : params.conv) {
        GradientSet::ConvGrad cg;
        cg.kernel.assign(layer.kernel.size(), 0.0);
        cg.bias.assign(layer.bias.size(), 0.0);
        cg.bn_gain.assign(layer.bn_gain.size(), 0.0);
        cg.bn_shift.assign(layer.bn_shift.size(), 0.0);
        g.conv.push_back(std::move(cg));
    }
    for (const auto& layer : params.fc) {
        GradientSet::FcGrad fg;
        fg.w.assign(layer.w.size(), 0.0);
        fg.b.assign(layer.b.size(), 0.0);
        g.fc.push_back(std::move(fg));
    }
    return g;
}

GradientSet backward(const ParameterSet& params, const ForwardTrace& trace,
                     const std::vector<int>& gold) {
    const ModelConfig& cfg = params.config;
    const int B = trace.batch;
    const int L = cfg.max_len;
    if (trace.mode != Mode::train)
        throw std::invalid_argument("backward needs a train-mode trace");
    if (static_cast<int>(gold.size()) != B)
        throw std::invalid_argument("backward: gold size mismatch");

    GradientSet grads = make_gradients(params);

    // d(mean batch loss)/d(logits) = (softmax - onehot) / B
    std::vector<double> dcur(static_cast<size_t>(B) * 2, 0.0);
    for (int b = 0; b < B; ++b) {
        auto pr = softmax2(trace.logits[static_cast<size_t>(b) * 2],
                           trace.logits[static_cast<size_t>(b) * 2 + 1]);
        dcur[static_cast<size_t>(b) * 2] = (pr[0] - (gold[static_cast<size_t>(b)] == 0 ? 1.0 : 0.0)) / B;
        dcur[static_cast<size_t>(b) * 2 + 1] =
            (pr[1] - (gold[static_cast<size_t>(b)] == 1 ? 1.0 : 0.0)) / B;
    }

    for (int l = 2; l >= 0; --l) {
        const FcLayer& fc = params.fc[static_cast<size_t>(l)];
        auto& fg = grads.fc[static_cast<size_t>(l)];
        const std::vector<double>& input =
            l == 0 ? trace.fc_in : trace.fc_post[static_cast<size_t>(l) - 1];
        std::vector<double> dinput(static_cast<size_t>(B) * fc.in, 0.0);
        for (int b = 0; b < B; ++b) {
            const double* in = input.data() + static_cast<size_t>(b) * fc.in;
            const double* dout = dcur.data() + static_cast<size_t>(b) * fc.out;
            double* din = dinput.data() + static_cast<size_t>(b) * fc.in;
            for (int o = 0; o < fc.out; ++o) {
                const double d = dout[o];
                if (d == 0.0) continue;
                fg.b[static_cast<size_t>(o)] += d;
                double* wg = fg.w.data() + static_cast<size_t>(o) * fc.in;
                const double* wr = fc.w.data() + static_cast<size_t>(o) * fc.in;
                for (int i = 0; i < fc.in; ++i) {
                    wg[i] += d * in[i];
                    din[i] += d * wr[i];
                }
            }
        }
        if (l > 0) {
            // through the ReLU in front of this layer
            const auto& pre = trace.fc_pre[static_cast<size_t>(l) - 1];
            for (size_t i = 0; i < dinput.size(); ++i)
                if (pre[i] <= 0.0) dinput[i] = 0.0;
        }
        dcur = std::move(dinput);
    }

    // split off the scalar tail; un-pool into the dropout-masked stack
    const int C5 = cfg.conv_channels.back();
    const int V = C5 + cfg.scalar_dim;
    std::vector<double> dstack(static_cast<size_t>(B) * C5 * L, 0.0);
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < C5; ++c) {
            const double d = dcur[static_cast<size_t>(b) * V + c];
            if (d == 0.0) continue;
            const size_t base = (static_cast<size_t>(b) * C5 + c) * L;
            const int p = trace.pool_argmax[static_cast<size_t>(b) * C5 + c];
            const double m =
                trace.dropout_mask.empty() ? 1.0 : trace.dropout_mask[base + static_cast<size_t>(p)];
            dstack[base + static_cast<size_t>(p)] += d * m;
        }
    }

    // walk the conv blocks backwards
    std::vector<double> dy = std::move(dstack);
    for (int l = 4; l >= 0; --l) {
        const ConvLayer& layer = params.conv[static_cast<size_t>(l)];
        auto& cg = grads.conv[static_cast<size_t>(l)];
        const int C = layer.out_ch;
        const std::vector<double>& post =
            l == 4 ? trace.stack_out : trace.x[static_cast<size_t>(l) + 1];

        // ReLU
        for (size_t i = 0; i < dy.size(); ++i)
            if (post[i] <= 0.0) dy[i] = 0.0;

        // batch norm: dz = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat*xhat))
        const auto& xhat = trace.xhat[static_cast<size_t>(l)];
        const auto& inv_std = trace.inv_std[static_cast<size_t>(l)];
        const double n = static_cast<double>(B) * L;
        std::vector<double> dz(dy.size(), 0.0);
        for (int c = 0; c < C; ++c) {
            const double g = layer.bn_gain[static_cast<size_t>(c)];
            double sum_d = 0.0, sum_dx = 0.0, sum_gain = 0.0;
            for (int b = 0; b < B; ++b) {
                const size_t base = (static_cast<size_t>(b) * C + c) * L;
                for (int p = 0; p < L; ++p) {
                    const double d = dy[base + p];
                    sum_gain += d * xhat[base + p];
                    sum_d += d;
                }
            }
            cg.bn_gain[static_cast<size_t>(c)] += sum_gain;
            cg.bn_shift[static_cast<size_t>(c)] += sum_d;
            // sums of dxhat = g * dy
            sum_dx = g * sum_d;
            const double sum_dx_xhat = g * sum_gain;
            const double is = inv_std[static_cast<size_t>(c)];
            for (int b = 0; b < B; ++b) {
                const size_t base = (static_cast<size_t>(b) * C + c) * L;
                for (int p = 0; p < L; ++p) {
                    const double dxhat = g * dy[base + p];
                    dz[base + p] =
                        is * (dxhat - sum_dx / n - xhat[base + p] * (sum_dx_xhat / n));
                }
            }
        }

        // conv gradients and input gradient
        const auto& x = trace.x[static_cast<size_t>(l)];
        const int Ci = layer.in_ch, K = layer.k, pad = layer.k / 2;
        std::vector<double> dx(static_cast<size_t>(B) * Ci * L, 0.0);
        for (int b = 0; b < B; ++b) {
            const double* xb = x.data() + static_cast<size_t>(b) * Ci * L;
            double* dxb = dx.data() + static_cast<size_t>(b) * Ci * L;
            for (int o = 0; o < C; ++o) {
                const double* dzr = dz.data() + (static_cast<size_t>(b) * C + o) * L;
                double bias_sum = 0.0;
                for (int p = 0; p < L; ++p) bias_sum += dzr[p];
                cg.bias[static_cast<size_t>(o)] += bias_sum;
                for (int i = 0; i < Ci; ++i) {
                    const double* xr = xb + static_cast<size_t>(i) * L;
                    double* dxr = dxb + static_cast<size_t>(i) * L;
                    double* kg = cg.kernel.data() + (static_cast<size_t>(o) * Ci + i) * K;
                    const double* kr =
                        layer.kernel.data() + (static_cast<size_t>(o) * Ci + i) * K;
                    for (int t = 0; t < K; ++t) {
                        const int shift = t - pad;
                        const int p0 = std::max(0, -shift);
                        const int p1 = std::min(L, L - shift);
                        double ksum = 0.0;
                        const double w = kr[t];
                        for (int p = p0; p < p1; ++p) {
                            ksum += dzr[p] * xr[p + shift];
                            dxr[p + shift] += dzr[p] * w;
                        }
                        kg[t] += ksum;
                    }
                }
            }
        }
        dy = std::move(dx);
    }

    return grads;
}

OptimizerState make_optimizer_state(const ParameterSet& params) {
    OptimizerState s;
    s.step = 0;
    s.m = make_gradients(params);
    s.v = make_gradients(params);
    return s;
}

namespace {

void sgd_update(std::vector<double>& p, const std::vector<double>& g, double lr) {
    for (size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
}

void adam_update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, double lr, long long t) {
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
    for (size_t i = 0; i < p.size(); ++i) {
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEpsilon);
    }
}

} // namespace

void optimizer_step(ParameterSet& params, const GradientSet& grads, OptimizerState& state,
                    const TrainConfig& config) {
    const double lr = config.learning_rate;
    if (config.optimizer == Optimizer::sgd) {
        for (size_t l = 0; l < params.conv.size(); ++l) {
            sgd_update(params.conv[l].kernel, grads.conv[l].kernel, lr);
            sgd_update(params.conv[l].bias, grads.conv[l].bias, lr);
            sgd_update(params.conv[l].bn_gain, grads.conv[l].bn_gain, lr);
            sgd_update(params.conv[l].bn_shift, grads.conv[l].bn_shift, lr);
        }
        for (size_t l = 0; l < params.fc.size(); ++l) {
            sgd_update(params.fc[l].w, grads.fc[l].w, lr);
            sgd_update(params.fc[l].b, grads.fc[l].b, lr);
        }
        return;
    }
    const long long t = ++state.step;
    for (size_t l = 0; l < params.conv.size(); ++l) {
        adam_update(params.conv[l].kernel, grads.conv[l].kernel, state.m.conv[l].kernel,
                    state.v.conv[l].kernel, lr, t);
        adam_update(params.conv[l].bias, grads.conv[l].bias, state.m.conv[l].bias,
                    state.v.conv[l].bias, lr, t);
        adam_update(params.conv[l].bn_gain, grads.conv[l].bn_gain, state.m.conv[l].bn_gain,
                    state.v.conv[l].bn_gain, lr, t);
        adam_update(params.conv[l].bn_shift, grads.conv[l].bn_shift, state.m.conv[l].bn_shift,
                    state.v.conv[l].bn_shift, lr, t);
    }
    for (size_t l = 0; l < params.fc.size(); ++l) {
        adam_update(params.fc[l].w, grads.fc[l].w, state.m.fc[l].w, state.v.fc[l].w, lr, t);
        adam_update(params.fc[l].b, grads.fc[l].b, state.m.fc[l].b, state.v.fc[l].b, lr, t);
    }
}

TrainResult train(ParameterSet initial, const std::vector<features::FeaturizedExample>& trainset,
                  const TrainConfig& config, const EpochRecorder& recorder) {
    config.validate();
    if (trainset.empty()) throw DataError("train: empty training set");

    TrainResult result;
    result.params = std::move(initial);
    OptimizerState state = make_optimizer_state(result.params);

    const int N = static_cast<int>(trainset.size());
    std::vector<int> order(static_cast<size_t>(N));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            std::iota(order.begin(), order.end(), 0);
            Rng shuffle_rng(Rng::mix(config.seed, 0xE90Cull + static_cast<uint64_t>(epoch)));
            shuffle_rng.shuffle(order);
        }

        double loss_sum = 0.0;
        int batch_index = 0;
        for (int start = 0; start < N; start += config.batch_size, ++batch_index) {
            const int end = std::min(N, start + config.batch_size);
            std::vector<const features::FeaturizedExample*> batch;
            std::vector<int> gold;
            batch.reserve(static_cast<size_t>(end - start));
            for (int i = start; i < end; ++i) {
                batch.push_back(&trainset[static_cast<size_t>(order[static_cast<size_t>(i)])]);
                gold.push_back(batch.back()->gold);
            }

            Rng dropout_rng(Rng::mix(Rng::mix(config.seed, 0xD80ull),
                                     static_cast<uint64_t>(epoch) * 1000003ull +
                                         static_cast<uint64_t>(batch_index)));
            ForwardTrace trace;
            double batch_loss = 0.0;
            try {
                forward(result.params, batch, Mode::train, &dropout_rng, trace);
                for (int b = 0; b < static_cast<int>(batch.size()); ++b) {
                    auto pr = softmax2(trace.logits[static_cast<size_t>(b) * 2],
                                       trace.logits[static_cast<size_t>(b) * 2 + 1]);
                    batch_loss += cross_entropy(pr, gold[static_cast<size_t>(b)]);
                }
                batch_loss /= static_cast<double>(batch.size());
            } catch (const DivergenceError&) {
                batch_loss = std::numeric_limits<double>::quiet_NaN();
            }
            if (!std::isfinite(batch_loss))
                throw DivergenceError("diverged at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(batch_index));
            loss_sum += batch_loss * static_cast<double>(batch.size());

            GradientSet grads = backward(result.params, trace, gold);
            optimizer_step(result.params, grads, state, config);

            // commit the momentum-updated running statistics
            for (size_t l = 0; l < result.params.conv.size(); ++l) {
                result.params.conv[l].bn_mean = trace.new_bn_mean[l];
                result.params.conv[l].bn_var = trace.new_bn_var[l];
            }
        }
        result.epoch_losses.push_back(loss_sum / static_cast<double>(N));
        if (recorder) recorder(result.params, epoch);
    }
    return result;
}

std::vector<int> predict(const ParameterSet& params,
                         const std::vector<features::FeaturizedExample>& split) {
    std::vector<int> preds;
    preds.reserve(split.size());
    constexpr int kEvalBatch = 64;
    for (size_t start = 0; start < split.size(); start += kEvalBatch) {
        const size_t end = std::min(split.size(), start + kEvalBatch);
        std::vector<const features::FeaturizedExample*> batch;
        for (size_t i = start; i < end; ++i) batch.push_back(&split[i]);
        ForwardTrace trace;
        forward(params, batch, Mode::eval, nullptr, trace);
        for (size_t b = 0; b < batch.size(); ++b) {
            const double l0 = trace.logits[b * 2];
            const double l1 = trace.logits[b * 2 + 1];
            preds.push_back(l1 > l0 ? 1 : 0); // ties go to class 0
        }
    }
    return preds;
}

Metrics metrics_from_predictions(const std::vector<int>& predictions,
                                 const std::vector<int>& gold) {
    if (predictions.size() != gold.size() || predictions.empty())
        throw std::invalid_argument("metrics: prediction/gold size mismatch or empty");
    Metrics m;
    for (size_t i = 0; i < predictions.size(); ++i)
        ++m.confusion[static_cast<size_t>(gold[i])][static_cast<size_t>(predictions[i])];

    const double total = static_cast<double>(predictions.size());
    m.accuracy = static_cast<double>(m.confusion[0][0] + m.confusion[1][1]) / total;
    for (size_t c = 0; c < 2; ++c) {
        const double tp = static_cast<double>(m.confusion[c][c]);
        const double fp = static_cast<double>(m.confusion[1 - c][c]);
        const double fn = static_cast<double>(m.confusion[c][1 - c]);
        m.precision[c] = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        m.recall[c] = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        const double pr = m.precision[c] + m.recall[c];
        m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
    }
    m.macro_f1 = (m.f1[0] + m.f1[1]) / 2.0;
    return m;
}

Metrics evaluate(const ParameterSet& params,
                 const std::vector<features::FeaturizedExample>& split) {
    if (split.empty()) throw DataError("evaluate: empty split");
    std::vector<int> gold;
    gold.reserve(split.size());
    for (const auto& ex : split) gold.push_back(ex.gold);
    return metrics_from_predictions(predict(params, split), gold);
}

// --- checkpoint io -----------------------------------------------------------

namespace {
constexpr uint32_t kCheckpointMagic = 0x4B434743; // "CGCK"
constexpr uint32_t kCheckpointVersion = 1;

void put_vec(std::string& buf, const std::vector<double>& v) {
    binio::put_u64(buf, v.size());
    for (double x : v) binio::put_f64(buf, x);
}

std::vector<double> get_vec(binio::Reader& r) {
    std::vector<double> v(r.u64());
    for (auto& x : v) x = r.f64();
    return v;
}
} // namespace

void save_checkpoint(const std::string& path, const ParameterSet& params, uint64_t seed) {
    std::string buf;
    binio::put_u32(buf, kCheckpointMagic);
    binio::put_u32(buf, kCheckpointVersion);
    const ModelConfig& c = params.config;
    for (int ch : c.conv_channels) binio::put_u32(buf, static_cast<uint32_t>(ch));
    binio::put_u32(buf, static_cast<uint32_t>(c.kernel_size));
    for (int d : c.fc_dims) binio::put_u32(buf, static_cast<uint32_t>(d));
    binio::put_f64(buf, c.dropout_rate);
    binio::put_u32(buf, static_cast<uint32_t>(c.input_dim));
    binio::put_u32(buf, static_cast<uint32_t>(c.max_len));
    binio::put_u32(buf, static_cast<uint32_t>(c.scalar_dim));
    binio::put_u64(buf, seed);
    for (const auto& l : params.conv) {
        put_vec(buf, l.kernel);
        put_vec(buf, l.bias);
        put_vec(buf, l.bn_gain);
        put_vec(buf, l.bn_shift);
        put_vec(buf, l.bn_mean);
        put_vec(buf, l.bn_var);
    }
    for (const auto& l : params.fc) {
        put_vec(buf, l.w);
        put_vec(buf, l.b);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("write failed: " + path);
}

std::pair<ParameterSet, uint64_t> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string data = ss.str();
    binio::Reader r(data, path);
    if (r.u32() != kCheckpointMagic) throw DataError(path + ": not a checkpoint");
    if (r.u32() != kCheckpointVersion) throw DataError(path + ": unsupported version");

    ModelConfig c;
    c.conv_channels.resize(5);
    for (auto& ch : c.conv_channels) ch = static_cast<int>(r.u32());
    c.kernel_size = static_cast<int>(r.u32());
    c.fc_dims.resize(3);
    for (auto& d : c.fc_dims) d = static_cast<int>(r.u32());
    c.dropout_rate = r.f64();
    c.input_dim = static_cast<int>(r.u32());
    c.max_len = static_cast<int>(r.u32());
    c.scalar_dim = static_cast<int>(r.u32());
    const uint64_t seed = r.u64();

    ParameterSet p = init_model(c, 0); // shapes only; values replaced below
    for (auto& l : p.conv) {
        l.kernel = get_vec(r);
        l.bias = get_vec(r);
        l.bn_gain = get_vec(r);
        l.bn_shift = get_vec(r);
        l.bn_mean = get_vec(r);
        l.bn_var = get_vec(r);
        if (l.kernel.size() != static_cast<size_t>(l.out_ch) * l.in_ch * l.k ||
            l.bias.size() != static_cast<size_t>(l.out_ch))
            throw DataError(path + ": conv shape mismatch");
    }
    for (auto& l : p.fc) {
        l.w = get_vec(r);
        l.b = get_vec(r);
        if (l.w.size() != static_cast<size_t>(l.out) * l.in ||
            l.b.size() != static_cast<size_t>(l.out))
            throw DataError(path + ": fc shape mismatch");
    }
    if (!r.at_end()) throw DataError(path + ": trailing bytes");
    return {std::move(p), seed};
}

} // namespace cartograf::model
