#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ksudf/geometry/types.hpp"

namespace ksudf {

struct TrainingSet;

// Over-aligned so the layer views always meet the vector kernels at the same
// alignment; with a plain vector the summation order inside Eigen's
// matrix-vector products, and hence the low bits of every result, would
// depend on where the heap happened to place the weights.
using ParameterVector = std::vector<double, Eigen::aligned_allocator<double>>;

// Scalar field over R^3 with an input gradient. Reconstruction and the edge
// metric only need this, which lets tests inject analytic fields.
class DifferentiableField {
public:
    virtual ~DifferentiableField() = default;

    virtual double value(const Vec3& x) const = 0;
    virtual Vec3 gradient(const Vec3& x) const = 0;

    /// Batched evaluation; either output may be null.
    virtual void evaluate(std::span<const Vec3> xs, std::vector<double>* values,
                          std::vector<Vec3>* gradients) const;
};

// Three blocks of two fully connected layers (3 -> h -> h | h -> h | h -> 1).
// Block 2 and the first layer of block 3 carry additive skips, applied after
// the activation:
//   z1 = act(L2 act(L1 x))
//   z2 = act(L4 act(L3 z1)) + z1
//   z3 = act(L5 z2) + z2
//   f  = L6 z3
struct MlpArchitecture {
    std::size_t hidden = 128;
    double negative_slope = 0.01;

    static constexpr std::size_t kLayers = 6;

    void validate() const;
    std::size_t layer_inputs(std::size_t l) const { return l == 0 ? 3 : hidden; }
    std::size_t layer_outputs(std::size_t l) const { return l + 1 == kLayers ? 1 : hidden; }
    std::size_t parameter_count() const;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 64;
    std::size_t epochs = 2000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainingMetadata {
    std::size_t epochs = 0;
    double final_loss = 0.0;  // full-data MSE after the last epoch
    std::uint64_t init_seed = 0;
    std::uint64_t train_seed = 0;
    std::vector<double> loss_trace;  // mean batch loss of each epoch
};

class NeuralUdf final : public DifferentiableField {
public:
    /// He fan-in normal weights, zero biases.
    static NeuralUdf init(const MlpArchitecture& arch, std::uint64_t seed);
    /// All parameters zero.
    static NeuralUdf zeros(const MlpArchitecture& arch);

    const MlpArchitecture& architecture() const { return arch_; }
    std::size_t parameter_count() const { return theta_.size(); }
    ParameterVector& parameters() { return theta_; }
    const ParameterVector& parameters() const { return theta_; }
    const TrainingMetadata& metadata() const { return meta_; }
    TrainingMetadata& metadata() { return meta_; }

    // weight(l) is outputs x inputs, stored column-major inside the flat vector.
    Eigen::Map<Eigen::MatrixXd> weight(std::size_t l);
    Eigen::Map<const Eigen::MatrixXd> weight(std::size_t l) const;
    Eigen::Map<Eigen::VectorXd> bias(std::size_t l);
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const;

    double value(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    void evaluate(std::span<const Vec3> xs, std::vector<double>* values,
                  std::vector<Vec3>* gradients) const override;

    /// Forward on a 3 x B batch.
    Eigen::RowVectorXd forward(const Eigen::MatrixXd& x) const;

    /// Pre-activations of the five hidden layers at x, concatenated.
    std::vector<double> pre_activations(const Vec3& x) const;

    void save(const std::filesystem::path& path) const;
    static NeuralUdf load(const std::filesystem::path& path);
    std::string to_json() const;
    static NeuralUdf from_json(const std::string& text);

private:
    explicit NeuralUdf(const MlpArchitecture& arch);

    friend class Trainer;

    std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
    std::size_t bias_offset(std::size_t l) const {
        return offsets_[l] + arch_.layer_inputs(l) * arch_.layer_outputs(l);
    }

    MlpArchitecture arch_;
    ParameterVector theta_;
    std::vector<std::size_t> offsets_;
    TrainingMetadata meta_;
};

/// Minimize the mean squared error to `targets` with Adam over shuffled
/// mini-batches. Throws DivergenceError if a loss becomes non-finite.
NeuralUdf train(NeuralUdf net, std::span<const Vec3> inputs, std::span<const double> targets,
                const TrainConfig& cfg);
NeuralUdf train(NeuralUdf net, const TrainingSet& data, const TrainConfig& cfg);

/// Full-data mean squared error.
double mean_squared_error(const NeuralUdf& net, std::span<const Vec3> inputs,
                          std::span<const double> targets);

/// `epoch,loss`
void write_loss_csv(const std::vector<double>& trace, const std::filesystem::path& path);

}  // namespace ksudf
