#include "snipcorr/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "snipcorr/error.hpp"
#include "snipcorr/random.hpp"

namespace snipcorr::lstm {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <typename Derived>
void apply_gates(Eigen::MatrixBase<Derived>& z, int h) {
    auto& m = z.derived();
    m.topRows(2 * h) = m.topRows(2 * h).unaryExpr([](double v) { return sigmoid(v); });
    m.middleRows(2 * h, h) = m.middleRows(2 * h, h).array().tanh().matrix();
    m.bottomRows(h) = m.bottomRows(h).unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

void NetworkConfig::validate() const {
    if (num_layers < 1 || hidden_size < 1 || input_channels < 1 || output_channels < 1 ||
        batch_size < 1 || max_epochs < 1 || patience_epochs < 1)
        throw DomainError("network config counts must be >= 1");
    if (tau < 1) throw DomainError("tau must be >= 1");
    if (!(learning_rate > 0.0)) throw DomainError("learning rate must be positive");
    if (!(min_improvement_fraction >= 0.0 && min_improvement_fraction < 1.0))
        throw DomainError("min improvement fraction must lie in [0, 1)");
}

void LstmCellParams::validate() const {
    const auto h = U.cols();
    if (U.rows() != kGates * h || W.rows() != kGates * h || b.size() != kGates * h)
        throw ShapeError("LSTM cell parameter shapes disagree");
    if (!W.allFinite() || !U.allFinite() || !b.allFinite())
        throw DomainError("LSTM cell parameters must be finite");
}

LstmState cell_forward(const Vector& x, const LstmState& state, const LstmCellParams& p) {
    const int h = p.hidden();
    if (x.size() != p.input_width()) throw ShapeError("cell input width mismatch");
    if (state.hidden.size() != h || state.cell.size() != h) throw ShapeError("cell state size mismatch");
    if (p.W.rows() != kGates * h || p.b.size() != kGates * h) throw ShapeError("cell parameter shape mismatch");

    Vector z = p.W * x + p.U * state.hidden + p.b;
    apply_gates(z, h);
    LstmState next;
    next.cell = z.segment(kForget * h, h).cwiseProduct(state.cell) +
                z.segment(kInput * h, h).cwiseProduct(z.segment(kCandidate * h, h));
    next.hidden = z.segment(kOutput * h, h).cwiseProduct(next.cell.array().tanh().matrix());
    return next;
}

Matrix resample(const std::vector<std::vector<double>>& channels, int tau) {
    if (tau < 1) throw DomainError("tau must be >= 1");
    if (channels.empty()) throw ShapeError("resample needs at least one channel");
    const std::size_t n = channels.front().size();
    for (const auto& c : channels)
        if (c.size() != n) throw ShapeError("resample channels differ in length");
    if (n < static_cast<std::size_t>(tau)) throw DomainError("series shorter than tau");

    const auto rows = static_cast<Eigen::Index>(n / static_cast<std::size_t>(tau));
    const auto width = static_cast<Eigen::Index>(tau) * static_cast<Eigen::Index>(channels.size());
    Matrix out(rows, width);
    for (Eigen::Index j = 0; j < rows; ++j)
        for (std::size_t c = 0; c < channels.size(); ++c)
            for (int k = 0; k < tau; ++k)
                out(j, static_cast<Eigen::Index>(c) * tau + k) = channels[c][static_cast<std::size_t>(j * tau + k)];
    return out;
}

std::vector<std::vector<double>> unresample(const Matrix& rows, int channels) {
    if (channels < 1 || rows.cols() % channels != 0) throw ShapeError("unresample width mismatch");
    const auto tau = rows.cols() / channels;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(channels),
                                         std::vector<double>(static_cast<std::size_t>(rows.rows() * tau)));
    for (Eigen::Index j = 0; j < rows.rows(); ++j)
        for (int c = 0; c < channels; ++c)
            for (Eigen::Index k = 0; k < tau; ++k)
                out[static_cast<std::size_t>(c)][static_cast<std::size_t>(j * tau + k)] = rows(j, c * tau + k);
    return out;
}

Normalization Normalization::identity(int input_channels, int output_channels) {
    Normalization n;
    n.inputs.assign(static_cast<std::size_t>(input_channels), ChannelNorm{});
    n.targets.assign(static_cast<std::size_t>(output_channels), ChannelNorm{});
    return n;
}

namespace {

std::vector<ChannelNorm> fit_channels(std::span<const Sample> samples, int count, bool targets) {
    std::vector<ChannelNorm> out(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        double sum = 0.0, sumsq = 0.0;
        std::size_t n = 0;
        for (const auto& s : samples) {
            const auto& chans = targets ? s.targets : s.inputs;
            if (chans.size() != static_cast<std::size_t>(count)) throw ShapeError("sample channel count mismatch");
            for (double v : chans[static_cast<std::size_t>(c)]) {
                sum += v;
                ++n;
            }
        }
        if (n == 0) throw DomainError("normalization needs data");
        const double mean = sum / static_cast<double>(n);
        for (const auto& s : samples)
            for (double v : (targets ? s.targets : s.inputs)[static_cast<std::size_t>(c)])
                sumsq += (v - mean) * (v - mean);
        const double sd = std::sqrt(sumsq / static_cast<double>(n));
        out[static_cast<std::size_t>(c)] = {mean, sd > 0.0 ? sd : 1.0};
    }
    return out;
}

}  // namespace

Normalization fit_normalization(std::span<const Sample> samples, int input_channels, int output_channels) {
    Normalization n;
    n.inputs = fit_channels(samples, input_channels, false);
    n.targets = fit_channels(samples, output_channels, true);
    return n;
}

LstmNetwork LstmNetwork::initialize(const NetworkConfig& cfg) {
    cfg.validate();
    LstmNetwork net;
    net.config_ = cfg;
    Rng rng(derive_seed(cfg.rng_seed, "lstm/init"));
    const int h = cfg.hidden_size;
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    auto fill = [&](auto& m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
    };
    for (int l = 0; l < cfg.num_layers; ++l) {
        const int d = l == 0 ? cfg.input_width() : h;
        LstmCellParams p{Matrix(kGates * h, d), Matrix(kGates * h, h), Vector(kGates * h)};
        fill(p.W);
        fill(p.U);
        fill(p.b);
        p.gate_b(kForget).setConstant(1.0);
        net.layers_.push_back(std::move(p));
    }
    net.head_W_.resize(cfg.output_width(), h);
    fill(net.head_W_);
    net.head_b_ = Vector::Zero(cfg.output_width());
    net.norm_ = Normalization::identity(cfg.input_channels, cfg.output_channels);
    return net;
}

void LstmNetwork::validate() const {
    config_.validate();
    if (static_cast<int>(layers_.size()) != config_.num_layers) throw ShapeError("layer count mismatch");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l].validate();
        const int d = l == 0 ? config_.input_width() : config_.hidden_size;
        if (layers_[l].input_width() != d || layers_[l].hidden() != config_.hidden_size)
            throw ShapeError("layer " + std::to_string(l) + " shape mismatch");
    }
    if (head_W_.rows() != config_.output_width() || head_W_.cols() != config_.hidden_size ||
        head_b_.size() != config_.output_width())
        throw ShapeError("output head shape mismatch");
    if (norm_.inputs.size() != static_cast<std::size_t>(config_.input_channels) ||
        norm_.targets.size() != static_cast<std::size_t>(config_.output_channels))
        throw ShapeError("normalization channel count mismatch");
}

std::size_t LstmNetwork::parameter_count() const {
    std::size_t n = static_cast<std::size_t>(head_W_.size() + head_b_.size());
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.W.size() + l.U.size() + l.b.size());
    return n;
}

Sequence LstmNetwork::prepare(const Sample& sample) const {
    const auto& cfg = config_;
    if (sample.inputs.size() != static_cast<std::size_t>(cfg.input_channels))
        throw ShapeError("expected " + std::to_string(cfg.input_channels) + " input channels, got " +
                         std::to_string(sample.inputs.size()));
    auto normalized = [](const std::vector<std::vector<double>>& chans, const std::vector<ChannelNorm>& norm) {
        std::vector<std::vector<double>> out = chans;
        for (std::size_t c = 0; c < out.size(); ++c)
            for (double& v : out[c]) v = (v - norm[c].mean) / norm[c].scale;
        return out;
    };
    const std::size_t n = sample.inputs.front().size();
    Sequence seq;
    if (n < static_cast<std::size_t>(cfg.tau)) {
        seq.inputs.resize(cfg.input_width(), 0);
        seq.targets.resize(cfg.output_width(), 0);
        return seq;
    }
    seq.inputs = resample(normalized(sample.inputs, norm_.inputs), cfg.tau).transpose();
    if (!sample.targets.empty()) {
        if (sample.targets.size() != static_cast<std::size_t>(cfg.output_channels))
            throw ShapeError("target channel count mismatch");
        if (sample.targets.front().size() != n) throw ShapeError("targets and inputs differ in length");
        seq.targets = resample(normalized(sample.targets, norm_.targets), cfg.tau).transpose();
    } else {
        seq.targets.resize(cfg.output_width(), 0);
    }
    return seq;
}

Matrix LstmNetwork::forward_normalized(const Matrix& inputs) const {
    const int h = config_.hidden_size;
    const Eigen::Index steps = inputs.cols();
    if (inputs.rows() != config_.input_width()) throw ShapeError("input width mismatch");
    Matrix layer_in = inputs;
    Matrix layer_out(h, steps);
    for (const auto& p : layers_) {
        Matrix proj = p.W * layer_in;
        proj.colwise() += p.b;
        Vector hs = Vector::Zero(h), cs = Vector::Zero(h);
        for (Eigen::Index t = 0; t < steps; ++t) {
            Vector z = proj.col(t) + p.U * hs;
            apply_gates(z, h);
            cs = z.segment(kForget * h, h).cwiseProduct(cs) +
                 z.segment(kInput * h, h).cwiseProduct(z.segment(kCandidate * h, h));
            hs = z.segment(kOutput * h, h).cwiseProduct(cs.array().tanh().matrix());
            layer_out.col(t) = hs;
        }
        layer_in.swap(layer_out);
        layer_out.resize(h, steps);
    }
    Matrix y = head_W_ * layer_in;
    y.colwise() += head_b_;
    return y;
}

std::vector<std::vector<double>> LstmNetwork::forward(const std::vector<std::vector<double>>& inputs) const {
    const Sequence seq = prepare(Sample{inputs, {}});
    const Matrix y = forward_normalized(seq.inputs);
    auto out = unresample(y.transpose(), config_.output_channels);
    for (std::size_t c = 0; c < out.size(); ++c)
        for (double& v : out[c]) v = v * norm_.targets[c].scale + norm_.targets[c].mean;
    return out;
}

std::vector<std::vector<std::vector<double>>> LstmNetwork::forward_batch(
    std::span<const std::vector<std::vector<double>>> inputs) const {
    std::vector<std::vector<std::vector<double>>> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) out.push_back(forward(in));
    return out;
}

Gradients Gradients::zeros_like(const LstmNetwork& net) {
    Gradients g;
    for (const auto& l : net.layers())
        g.layers.push_back({Matrix::Zero(l.W.rows(), l.W.cols()), Matrix::Zero(l.U.rows(), l.U.cols()),
                            Vector::Zero(l.b.size())});
    g.head_W = Matrix::Zero(net.head_weights().rows(), net.head_weights().cols());
    g.head_b = Vector::Zero(net.head_bias().size());
    return g;
}

void Gradients::set_zero() {
    for (auto& l : layers) {
        l.W.setZero();
        l.U.setZero();
        l.b.setZero();
    }
    head_W.setZero();
    head_b.setZero();
}

double mse(std::span<const double> target, std::span<const double> prediction) {
    if (target.size() != prediction.size()) throw ShapeError("mse: lengths differ");
    if (target.empty()) throw ShapeError("mse: empty windows");
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - prediction[i];
        s += d * d;
    }
    return s / static_cast<double>(target.size());
}

namespace {

// Forward activations of one equal-length group, laid out step-major:
// column t*B + b is step t of batch member b.
struct LayerCache {
    Matrix input;   // d x (T*B)
    Matrix gates;   // 4h x (T*B), activated
    Matrix cell;    // h x (T*B)
    Matrix tanh_c;  // h x (T*B)
    Matrix hidden;  // h x (T*B)
};

double group_loss(const LstmNetwork& net, std::span<const Sequence* const> group, Gradients* grads,
                  double weight) {
    const auto& cfg = net.config();
    const int h = cfg.hidden_size;
    const auto B = static_cast<Eigen::Index>(group.size());
    const auto T = static_cast<Eigen::Index>(group.front()->steps());
    const Eigen::Index cols = T * B;
    if (T == 0) return 0.0;

    std::vector<LayerCache> caches(net.layers().size());
    Matrix x(cfg.input_width(), cols);
    Matrix y(cfg.output_width(), cols);
    for (Eigen::Index b = 0; b < B; ++b) {
        const Sequence& s = *group[static_cast<std::size_t>(b)];
        for (Eigen::Index t = 0; t < T; ++t) {
            x.col(t * B + b) = s.inputs.col(t);
            y.col(t * B + b) = s.targets.col(t);
        }
    }

    const Matrix* layer_in = &x;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const auto& p = net.layers()[l];
        auto& c = caches[l];
        c.input = *layer_in;
        c.gates.noalias() = p.W * c.input;
        c.gates.colwise() += p.b;
        c.cell.resize(h, cols);
        c.tanh_c.resize(h, cols);
        c.hidden.resize(h, cols);
        Matrix h_prev = Matrix::Zero(h, B);
        Matrix c_prev = Matrix::Zero(h, B);
        for (Eigen::Index t = 0; t < T; ++t) {
            auto z = c.gates.middleCols(t * B, B);
            z.noalias() += p.U * h_prev;
            auto zm = z.eval();
            apply_gates(zm, h);
            z = zm;
            auto ct = c.cell.middleCols(t * B, B);
            ct = z.topRows(h).cwiseProduct(c_prev) + z.middleRows(h, h).cwiseProduct(z.middleRows(2 * h, h));
            c.tanh_c.middleCols(t * B, B) = ct.array().tanh().matrix();
            c.hidden.middleCols(t * B, B) = z.bottomRows(h).cwiseProduct(c.tanh_c.middleCols(t * B, B));
            h_prev = c.hidden.middleCols(t * B, B);
            c_prev = ct;
        }
        layer_in = &c.hidden;
    }

    Matrix pred = net.head_weights() * caches.back().hidden;
    pred.colwise() += net.head_bias();
    const Matrix diff = pred - y;
    const double loss = diff.squaredNorm();
    if (!grads) return loss;

    // d(weight * sum diff^2)/d pred
    const Matrix dpred = 2.0 * weight * diff;
    grads->head_W.noalias() += dpred * caches.back().hidden.transpose();
    grads->head_b += dpred.rowwise().sum();
    Matrix dh_above = net.head_weights().transpose() * dpred;  // h x cols

    for (std::size_t li = net.layers().size(); li-- > 0;) {
        const auto& p = net.layers()[li];
        const auto& c = caches[li];
        auto& g = grads->layers[li];
        Matrix dz(kGates * h, cols);
        Matrix dh_next = Matrix::Zero(h, B);
        Matrix dc_next = Matrix::Zero(h, B);
        for (Eigen::Index t = T; t-- > 0;) {
            const auto gates = c.gates.middleCols(t * B, B);
            const auto f1 = gates.topRows(h).array();
            const auto f2 = gates.middleRows(h, h).array();
            const auto f3 = gates.middleRows(2 * h, h).array();
            const auto f4 = gates.bottomRows(h).array();
            const auto tc = c.tanh_c.middleCols(t * B, B).array();

            const Matrix dh = dh_above.middleCols(t * B, B) + dh_next;
            const Eigen::ArrayXXd dc = dh.array() * f4 * (1.0 - tc * tc) + dc_next.array();
            const Eigen::ArrayXXd c_prev =
                t > 0 ? Eigen::ArrayXXd(c.cell.middleCols((t - 1) * B, B).array())
                      : Eigen::ArrayXXd::Zero(h, B);
            auto dzt = dz.middleCols(t * B, B);
            dzt.topRows(h) = (dc * c_prev * f1 * (1.0 - f1)).matrix();
            dzt.middleRows(h, h) = (dc * f3 * f2 * (1.0 - f2)).matrix();
            dzt.middleRows(2 * h, h) = (dc * f2 * (1.0 - f3 * f3)).matrix();
            dzt.bottomRows(h) = (dh.array() * tc * f4 * (1.0 - f4)).matrix();
            dc_next = (dc * f1).matrix();
            dh_next.noalias() = p.U.transpose() * dzt;
        }
        g.W.noalias() += dz * c.input.transpose();
        g.b += dz.rowwise().sum();
        if (T > 1)
            g.U.noalias() += dz.rightCols((T - 1) * B) * c.hidden.leftCols((T - 1) * B).transpose();
        if (li > 0) dh_above.noalias() = p.W.transpose() * dz;
    }
    return loss;
}

}  // namespace

double loss_and_gradients(const LstmNetwork& net, std::span<const Sequence* const> batch, Gradients* grads) {
    if (grads) grads->set_zero();
    if (batch.empty()) return 0.0;
    const auto& cfg = net.config();
    std::size_t total = 0;
    std::map<std::size_t, std::vector<const Sequence*>> groups;
    for (const Sequence* s : batch) {
        if (s->inputs.rows() != cfg.input_width() || s->targets.rows() != cfg.output_width() ||
            s->targets.cols() != s->inputs.cols())
            throw ShapeError("sequence shape does not match network");
        total += s->steps() * static_cast<std::size_t>(cfg.output_width());
        groups[s->steps()].push_back(s);
    }
    if (total == 0) return 0.0;
    const double weight = 1.0 / static_cast<double>(total);
    double loss = 0.0;
    for (const auto& [steps, group] : groups) loss += group_loss(net, group, grads, weight);
    return loss * weight;
}

namespace {

template <typename Fn>
void for_each_tensor(LstmNetwork& net, const Gradients* g, Fn&& fn) {
    std::size_t k = 0;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto& p = net.layers()[l];
        fn(k++, p.W.data(), g ? g->layers[l].W.data() : nullptr, p.W.size());
        fn(k++, p.U.data(), g ? g->layers[l].U.data() : nullptr, p.U.size());
        fn(k++, p.b.data(), g ? g->layers[l].b.data() : nullptr, p.b.size());
    }
    fn(k++, net.head_weights().data(), g ? g->head_W.data() : nullptr, net.head_weights().size());
    fn(k++, net.head_bias().data(), g ? g->head_b.data() : nullptr, net.head_bias().size());
}

}  // namespace

Adam::Adam(const LstmNetwork& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    auto& mutable_net = const_cast<LstmNetwork&>(net);
    for_each_tensor(mutable_net, nullptr, [&](std::size_t, double*, const double*, Eigen::Index n) {
        m_.push_back(Vector::Zero(n));
        v_.push_back(Vector::Zero(n));
    });
}

void Adam::step(LstmNetwork& net, const Gradients& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for_each_tensor(net, &grads, [&](std::size_t k, double* p, const double* g, Eigen::Index n) {
        Eigen::Map<Vector> param(p, n);
        Eigen::Map<const Vector> grad(g, n);
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad;
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad.cwiseProduct(grad);
        param.array() -= lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps_);
    });
}

bool EarlyStopping::update(double loss) {
    losses_.push_back(loss);
    const auto n = losses_.size();
    const auto p = static_cast<std::size_t>(patience_);
    if (n <= p) return false;
    const double before = *std::min_element(losses_.begin(), losses_.end() - static_cast<std::ptrdiff_t>(p));
    const double recent = *std::min_element(losses_.end() - static_cast<std::ptrdiff_t>(p), losses_.end());
    return recent > before * (1.0 - min_fraction_);
}

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> validation_set,
                  const NetworkConfig& cfg, const TrainOptions& opts) {
    if (train_set.empty() || validation_set.empty()) throw DomainError("training needs non-empty splits");
    cfg.validate();

    TrainResult result;
    LstmNetwork net = LstmNetwork::initialize(cfg);
    net.normalization() = opts.normalize ? fit_normalization(train_set, cfg.input_channels, cfg.output_channels)
                                         : Normalization::identity(cfg.input_channels, cfg.output_channels);

    std::vector<Sequence> train_seq, val_seq;
    train_seq.reserve(train_set.size());
    val_seq.reserve(validation_set.size());
    for (const auto& s : train_set) train_seq.push_back(net.prepare(s));
    for (const auto& s : validation_set) val_seq.push_back(net.prepare(s));
    std::vector<const Sequence*> val_ptrs;
    for (const auto& s : val_seq) val_ptrs.push_back(&s);

    // Losses are reported in physical units of the (first) target channel.
    const double unit = net.normalization().targets.front().scale * net.normalization().targets.front().scale;

    Adam adam(net, cfg.learning_rate);
    EarlyStopping stopper(cfg.patience_epochs, cfg.min_improvement_fraction);
    Gradients grads = Gradients::zeros_like(net);
    Rng rng(derive_seed(cfg.rng_seed, "lstm/shuffle"));
    std::vector<std::size_t> order(train_seq.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    LstmNetwork best = net;
    double best_val = std::numeric_limits<double>::infinity();
    result.history.stop_reason = "max_epochs";
    std::vector<const Sequence*> batch;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(&train_seq[order[i]]);
            const double loss = loss_and_gradients(net, batch, &grads);
            if (!std::isfinite(loss)) throw TrainingDivergence(epoch);
            adam.step(net, grads);
            sum += loss * static_cast<double>(stop - start);
            seen += stop - start;
        }
        const double train_mse = sum / static_cast<double>(seen) * unit;
        const double val_mse = loss_and_gradients(net, val_ptrs, nullptr) * unit;
        if (!std::isfinite(val_mse)) throw TrainingDivergence(epoch);
        result.history.train_mse.push_back(train_mse);
        result.history.validation_mse.push_back(val_mse);
        if (val_mse < best_val) {
            best_val = val_mse;
            best = net;
            result.history.best_epoch = epoch;
        }
        if (opts.on_epoch) opts.on_epoch(epoch, train_mse, val_mse);
        if (stopper.update(train_mse)) {
            result.history.stop_reason = "no_improvement";
            break;
        }
    }
    result.history.best_validation_mse = best_val;
    result.network = std::move(best);
    return result;
}

nlohmann::json to_json(const NetworkConfig& c) {
    return {{"num_layers", c.num_layers},
            {"hidden_size", c.hidden_size},
            {"tau", c.tau},
            {"input_channels", c.input_channels},
            {"output_channels", c.output_channels},
            {"learning_rate", c.learning_rate},
            {"max_epochs", c.max_epochs},
            {"patience_epochs", c.patience_epochs},
            {"min_improvement_fraction", c.min_improvement_fraction},
            {"batch_size", c.batch_size},
            {"rng_seed", c.rng_seed}};
}

NetworkConfig config_from_json(const nlohmann::json& doc) {
    static const char* known[] = {"num_layers", "hidden_size", "tau", "input_channels", "output_channels",
                                  "learning_rate", "max_epochs", "patience_epochs",
                                  "min_improvement_fraction", "batch_size", "rng_seed"};
    for (const auto& [key, value] : doc.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known))
            throw ConfigError("unknown network key '" + key + "'");
    NetworkConfig c;
    c.num_layers = doc.value("num_layers", c.num_layers);
    c.hidden_size = doc.value("hidden_size", c.hidden_size);
    c.tau = doc.value("tau", c.tau);
    c.input_channels = doc.value("input_channels", c.input_channels);
    c.output_channels = doc.value("output_channels", c.output_channels);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.max_epochs = doc.value("max_epochs", c.max_epochs);
    c.patience_epochs = doc.value("patience_epochs", c.patience_epochs);
    c.min_improvement_fraction = doc.value("min_improvement_fraction", c.min_improvement_fraction);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.rng_seed = doc.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

namespace {

template <typename M>
nlohmann::json tensor_json(const M& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Matrix tensor_from_json(const nlohmann::json& doc, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    const auto shape = doc.at("shape").get<std::vector<Eigen::Index>>();
    const auto data = doc.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] != rows || shape[1] != cols ||
        data.size() != static_cast<std::size_t>(rows * cols))
        throw ShapeError("tensor '" + name + "' has unexpected shape");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
    return m;
}

nlohmann::json norm_json(const std::vector<ChannelNorm>& n) {
    auto arr = nlohmann::json::array();
    for (const auto& c : n) arr.push_back({{"mean", c.mean}, {"scale", c.scale}});
    return arr;
}

std::vector<ChannelNorm> norm_from_json(const nlohmann::json& doc) {
    std::vector<ChannelNorm> out;
    for (const auto& c : doc) out.push_back({c.at("mean").get<double>(), c.at("scale").get<double>()});
    return out;
}

}  // namespace

nlohmann::json to_json(const LstmNetwork& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : net.layers())
        layers.push_back({{"W", tensor_json(l.W)}, {"U", tensor_json(l.U)}, {"b", tensor_json(l.b)}});
    return {{"format", "snipcorr-lstm"},
            {"version", kModelFormatVersion},
            {"gate_order", {"forget", "input", "candidate", "output"}},
            {"config", to_json(net.config())},
            {"normalization", {{"inputs", norm_json(net.normalization().inputs)},
                               {"targets", norm_json(net.normalization().targets)}}},
            {"layers", layers},
            {"head", {{"W", tensor_json(net.head_weights())}, {"b", tensor_json(net.head_bias())}}}};
}

LstmNetwork from_json(const nlohmann::json& doc) {
    if (doc.value("format", std::string{}) != "snipcorr-lstm") throw IoError("not a snipcorr LSTM model");
    if (doc.at("version").get<int>() != kModelFormatVersion)
        throw IoError("unsupported model version " + doc.at("version").dump());
    LstmNetwork net;
    net.config_ = config_from_json(doc.at("config"));
    const int h = net.config_.hidden_size;
    const auto& layers = doc.at("layers");
    if (static_cast<int>(layers.size()) != net.config_.num_layers) throw ShapeError("model layer count mismatch");
    for (int l = 0; l < net.config_.num_layers; ++l) {
        const auto& lj = layers[static_cast<std::size_t>(l)];
        const int d = l == 0 ? net.config_.input_width() : h;
        LstmCellParams p;
        p.W = tensor_from_json(lj.at("W"), kGates * h, d, "W");
        p.U = tensor_from_json(lj.at("U"), kGates * h, h, "U");
        p.b = tensor_from_json(lj.at("b"), kGates * h, 1, "b");
        net.layers_.push_back(std::move(p));
    }
    net.head_W_ = tensor_from_json(doc.at("head").at("W"), net.config_.output_width(), h, "head.W");
    net.head_b_ = tensor_from_json(doc.at("head").at("b"), net.config_.output_width(), 1, "head.b");
    net.norm_.inputs = norm_from_json(doc.at("normalization").at("inputs"));
    net.norm_.targets = norm_from_json(doc.at("normalization").at("targets"));
    net.validate();
    return net;
}

void save_model(const LstmNetwork& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path);
    out << to_json(net).dump() << '\n';
    if (!out) throw IoError("failed writing model file " + path);
}

LstmNetwork load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model file " + path);
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model file " + path + ": " + e.what());
    }
}

}  // namespace snipcorr::lstm
