#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace snipcorr::lstm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Gate order inside the stacked parameter blocks: forget (f1), input
// activation (f2), candidate (f3), output (f4).
enum Gate : int { kForget = 0, kInput = 1, kCandidate = 2, kOutput = 3 };
inline constexpr int kGates = 4;

struct NetworkConfig {
    int num_layers = 2;
    int hidden_size = 30;
    int tau = 9;
    int input_channels = 3;
    int output_channels = 1;
    double learning_rate = 0.01;
    int max_epochs = 1000;
    int patience_epochs = 100;
    double min_improvement_fraction = 0.01;
    int batch_size = 32;
    std::uint64_t rng_seed = 1;

    int input_width() const { return input_channels * tau; }
    int output_width() const { return output_channels * tau; }
    void validate() const;
};

// W is 4h x d, U is 4h x h, b has 4h entries; gate g owns rows [g*h, (g+1)*h).
struct LstmCellParams {
    Matrix W;
    Matrix U;
    Vector b;

    int hidden() const { return static_cast<int>(U.cols()); }
    int input_width() const { return static_cast<int>(W.cols()); }
    auto gate_W(Gate g) { return W.middleRows(g * hidden(), hidden()); }
    auto gate_U(Gate g) { return U.middleRows(g * hidden(), hidden()); }
    auto gate_b(Gate g) { return b.segment(g * hidden(), hidden()); }
    void validate() const;
};

struct LstmState {
    Vector hidden;
    Vector cell;
};

LstmState cell_forward(const Vector& x, const LstmState& state, const LstmCellParams& params);

// Reshape C channels of N samples into [N/tau, tau*C]: row j holds samples
// j*tau .. j*tau+tau-1 of channel 0, then channel 1, and so on. The trailing
// N mod tau samples are dropped.
Matrix resample(const std::vector<std::vector<double>>& channels, int tau);
std::vector<std::vector<double>> unresample(const Matrix& rows, int channels);

struct ChannelNorm {
    double mean = 0.0;
    double scale = 1.0;
};

struct Normalization {
    std::vector<ChannelNorm> inputs;
    std::vector<ChannelNorm> targets;

    static Normalization identity(int input_channels, int output_channels);
};

// Physical-unit training example: input channels and (optionally empty)
// target channels, all of the same length.
struct Sample {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> targets;
};

Normalization fit_normalization(std::span<const Sample> samples, int input_channels,
                                int output_channels);

// Normalized, resampled sequence: columns are recurrent steps.
struct Sequence {
    Matrix inputs;   // input_width x steps
    Matrix targets;  // output_width x steps
    std::size_t steps() const { return static_cast<std::size_t>(inputs.cols()); }
};

class LstmNetwork {
public:
    LstmNetwork() = default;

    // Uniform(-1/sqrt(h), 1/sqrt(h)) weights, forget-gate bias +1.
    static LstmNetwork initialize(const NetworkConfig& cfg);

    const NetworkConfig& config() const { return config_; }
    std::vector<LstmCellParams>& layers() { return layers_; }
    const std::vector<LstmCellParams>& layers() const { return layers_; }
    Matrix& head_weights() { return head_W_; }
    const Matrix& head_weights() const { return head_W_; }
    Vector& head_bias() { return head_b_; }
    const Vector& head_bias() const { return head_b_; }
    Normalization& normalization() { return norm_; }
    const Normalization& normalization() const { return norm_; }

    Sequence prepare(const Sample& sample) const;

    // Normalized sequence in, normalized outputs out (output_width x steps).
    Matrix forward_normalized(const Matrix& inputs) const;

    // Physical channels in, physical target channels out; each output channel
    // holds floor(N/tau)*tau samples.
    std::vector<std::vector<double>> forward(const std::vector<std::vector<double>>& inputs) const;
    std::vector<std::vector<std::vector<double>>> forward_batch(
        std::span<const std::vector<std::vector<double>>> inputs) const;

    std::size_t parameter_count() const;
    void validate() const;

private:
    friend LstmNetwork from_json(const nlohmann::json& doc);

    NetworkConfig config_;
    std::vector<LstmCellParams> layers_;
    Matrix head_W_;  // output_width x h
    Vector head_b_;
    Normalization norm_;
};

// Gradient buffers with the network's shapes.
struct Gradients {
    std::vector<LstmCellParams> layers;
    Matrix head_W;
    Vector head_b;

    static Gradients zeros_like(const LstmNetwork& net);
    void set_zero();
};

// (1/N) sum (target - prediction)^2.
double mse(std::span<const double> target, std::span<const double> prediction);

// Mean squared error over every output element of the batch, in normalized
// units; fills grads (when given) with its exact gradient by BPTT.
double loss_and_gradients(const LstmNetwork& net, std::span<const Sequence* const> batch,
                          Gradients* grads);

class Adam {
public:
    Adam(const LstmNetwork& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);
    void step(LstmNetwork& net, const Gradients& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Vector> m_, v_;
};

// Stops once the best loss of the last `patience` epochs fails to beat the
// best loss before that window by at least min_fraction.
class EarlyStopping {
public:
    EarlyStopping(int patience, double min_fraction) : patience_(patience), min_fraction_(min_fraction) {}
    bool update(double loss);  // true => stop now
    std::size_t epochs_seen() const { return losses_.size(); }

private:
    int patience_;
    double min_fraction_;
    std::vector<double> losses_;
};

struct TrainingHistory {
    std::vector<double> train_mse;       // physical units, per epoch
    std::vector<double> validation_mse;  // physical units, per epoch
    int best_epoch = -1;  // 1-based
    double best_validation_mse = 0.0;
    std::string stop_reason;
};

struct TrainOptions {
    bool normalize = true;
    std::function<void(int epoch, double train_mse, double validation_mse)> on_epoch;
};

struct TrainResult {
    LstmNetwork network;
    TrainingHistory history;
};

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> validation_set,
                  const NetworkConfig& cfg, const TrainOptions& opts = {});

nlohmann::json to_json(const NetworkConfig& cfg);
NetworkConfig config_from_json(const nlohmann::json& doc);

inline constexpr int kModelFormatVersion = 1;
nlohmann::json to_json(const LstmNetwork& net);
LstmNetwork from_json(const nlohmann::json& doc);
void save_model(const LstmNetwork& net, const std::string& path);
LstmNetwork load_model(const std::string& path);

}  // namespace snipcorr::lstm
