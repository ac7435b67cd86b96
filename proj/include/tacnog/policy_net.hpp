// Fixed-horizon policy network N: Z_T -> R and its time-to-go scaling wrapper.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacnog/dataset.hpp"
#include "tacnog/extremal.hpp"

namespace tacnog {

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> W;  // out x in, row-major
    std::vector<double> b;  // out
};

/// Input feature map applied before per-feature normalization.
///  - cartesian: (x, y, theta) with theta wrapped to (-3pi/2, pi/2], so the seam sits
///    at the heading opposite the impact direction.
///  - reach_polar: (sqrt(max(T - r, 0)), line-of-sight angle from north, heading
///    relative to the line of sight), where r is the range to the target. T - r is
///    the path-length slack; the optimal control behaves like its square root near
///    the boundary of the reachable set.
enum class InputEncoding { cartesian, reach_polar };

std::string to_string(InputEncoding e);
InputEncoding parse_encoding(const std::string& s);  // throws ConfigError

struct PolicyNetwork {
    std::vector<std::size_t> arch{3, 20, 20, 1};
    InputEncoding encoding = InputEncoding::cartesian;
    std::string activation = "tanh";
    double horizon = 1.5;
    std::array<double, 3> input_shift{0.0, 0.0, 0.0};
    std::array<double, 3> input_scale{1.0, 1.0, 1.0};
    double output_shift = 0.0;
    double output_scale = 1.0;
    std::vector<DenseLayer> layers;

    /// All weights and biases zero; the output is then `output_shift` everywhere.
    static PolicyNetwork zeros(double horizon, const std::vector<std::size_t>& arch = {3, 20, 20, 1});
    /// Glorot-uniform weights, zero biases.
    static PolicyNetwork random(double horizon, std::uint64_t seed,
                                const std::vector<std::size_t>& arch = {3, 20, 20, 1});

    std::size_t parameter_count() const;
};

std::array<double, 3> encode_input(const ExtremalState& z, InputEncoding enc = InputEncoding::cartesian,
                                  double horizon = 1.5);

double net_forward(const PolicyNetwork& net, const ExtremalState& z);

/// u*(t_g, z_c) ~ (T/t_g) N(T/t_g x_c, T/t_g y_c, theta_c). Throws ExpiredHorizon if t_g <= 0.
double feedback_control(const PolicyNetwork& net, double t_go, const EngagementState& z_c);

/// Mean over the batch of (y - target)^2 with y and target both in output-normalized
/// units. Fills `grad` (same shape as net.layers) with dLoss/dparam.
double batch_loss_and_gradient(const PolicyNetwork& net, std::span<const DatasetRecord> batch,
                               std::vector<DenseLayer>& grad);
double batch_loss(const PolicyNetwork& net, std::span<const DatasetRecord> batch);

/// Root-mean-square control error in physical (canonical) units.
double rmse(const PolicyNetwork& net, std::span<const DatasetRecord> records);

enum class Optimizer { sgd_momentum, adam };

struct TrainConfig {
    Optimizer optimizer = Optimizer::sgd_momentum;
    int epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 0.02;
    double momentum = 0.9;  // SGD momentum, or Adam's first-moment decay
    double beta2 = 0.999;   // Adam only
    double lr_decay = 0.5;  // multiplier applied every `decay_every` epochs
    int decay_every = 60;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
    std::vector<std::size_t> arch{3, 20, 20, 1};
    InputEncoding encoding = InputEncoding::cartesian;
    double min_range = 0.0;  // records closer than this to the target are left out

    void validate() const;
};

struct TrainResult {
    PolicyNetwork net;                     // best-validation weights
    std::vector<double> train_loss;        // per epoch, normalized units
    std::vector<double> validation_rmse;   // per epoch
    std::vector<double> best_rmse;         // best-so-far, non-increasing
    double best_validation_rmse = 0.0;
    int best_epoch = 0;
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
};

/// Deterministic 90/10-style split by a hash of the provenance q. Falls back to a
/// hash of the record index when every record lands on one side.
void split_dataset(const std::vector<DatasetRecord>& data, double validation_fraction,
                   std::vector<DatasetRecord>& train, std::vector<DatasetRecord>& validation);

/// Mini-batch descent (SGD with momentum, or Adam) with step decay on the
/// normalized MSE. Throws ConfigError when the training split is smaller than the
/// batch size.
TrainResult train(const std::vector<DatasetRecord>& data, const TrainConfig& cfg, double horizon);

nlohmann::json network_to_json(const PolicyNetwork& net);
PolicyNetwork network_from_json(const nlohmann::json& j);  // throws LoadError on schema mismatch
void save_weights(const std::filesystem::path& path, const PolicyNetwork& net);
PolicyNetwork load_weights(const std::filesystem::path& path);

}  // namespace tacnog
