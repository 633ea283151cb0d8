#include "ksudf/nn/neural_udf.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"
#include "ksudf/sampler/training_sampler.hpp"

namespace ksudf {

void DifferentiableField::evaluate(std::span<const Vec3> xs, std::vector<double>* values,
                                   std::vector<Vec3>* gradients) const {
    if (values) {
        values->resize(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) (*values)[i] = value(xs[i]);
    }
    if (gradients) {
        gradients->resize(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) (*gradients)[i] = gradient(xs[i]);
    }
}

void MlpArchitecture::validate() const {
    if (hidden < 1) throw InvalidArgumentError("hidden width must be at least 1");
    if (!(negative_slope > 0.0 && negative_slope < 1.0)) {
        throw InvalidArgumentError("Leaky-ReLU negative slope must lie in (0, 1)");
    }
}

std::size_t MlpArchitecture::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < kLayers; ++l) n += (layer_inputs(l) + 1) * layer_outputs(l);
    return n;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgumentError("learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw InvalidArgumentError("Adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw InvalidArgumentError("Adam epsilon must be positive");
    if (batch_size < 1) throw InvalidArgumentError("batch size must be at least 1");
    if (epochs < 1) throw InvalidArgumentError("epoch count must be at least 1");
}

NeuralUdf::NeuralUdf(const MlpArchitecture& arch) : arch_(arch) {
    arch_.validate();
    std::size_t off = 0;
    for (std::size_t l = 0; l < MlpArchitecture::kLayers; ++l) {
        offsets_.push_back(off);
        off += (arch_.layer_inputs(l) + 1) * arch_.layer_outputs(l);
    }
    theta_.assign(off, 0.0);
}

NeuralUdf NeuralUdf::zeros(const MlpArchitecture& arch) { return NeuralUdf(arch); }

NeuralUdf NeuralUdf::init(const MlpArchitecture& arch, std::uint64_t seed) {
    NeuralUdf net(arch);
    Rng rng(seed);
    for (std::size_t l = 0; l < MlpArchitecture::kLayers; ++l) {
        const double sd = std::sqrt(2.0 / static_cast<double>(arch.layer_inputs(l)));
        auto w = net.weight(l);
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = sd * rng.normal();
    }
    net.meta_.init_seed = seed;
    return net;
}

Eigen::Map<Eigen::MatrixXd> NeuralUdf::weight(std::size_t l) {
    return {theta_.data() + weight_offset(l), static_cast<Eigen::Index>(arch_.layer_outputs(l)),
            static_cast<Eigen::Index>(arch_.layer_inputs(l))};
}
Eigen::Map<const Eigen::MatrixXd> NeuralUdf::weight(std::size_t l) const {
    return {theta_.data() + weight_offset(l), static_cast<Eigen::Index>(arch_.layer_outputs(l)),
            static_cast<Eigen::Index>(arch_.layer_inputs(l))};
}
Eigen::Map<Eigen::VectorXd> NeuralUdf::bias(std::size_t l) {
    return {theta_.data() + bias_offset(l), static_cast<Eigen::Index>(arch_.layer_outputs(l))};
}
Eigen::Map<const Eigen::VectorXd> NeuralUdf::bias(std::size_t l) const {
    return {theta_.data() + bias_offset(l), static_cast<Eigen::Index>(arch_.layer_outputs(l))};
}

namespace {

using Mat = Eigen::MatrixXd;

struct Cache {
    Mat a[5];  // pre-activations of layers 1..5
    Mat h1, z1, h3, z2, z3;
    Eigen::RowVectorXd out;
    Mat dz3, d5, dz2, d4, d3, dz1, d2, d1, dx;  // backward buffers
};

// For 0 < s < 1, leaky(a) = max(a, s a).
void leaky(const Mat& a, double s, Mat& out) { out = a.cwiseMax(s * a); }

// Derivative at exactly 0 is taken as the negative slope.
void leaky_backward(Mat& d, const Mat& a, double s) {
    d.array() *= a.array().unaryExpr([s](double v) { return v > 0.0 ? 1.0 : s; });
}

void forward_cached(const NeuralUdf& net, const Mat& x, Cache& c) {
    const double s = net.architecture().negative_slope;
    auto layer = [&](std::size_t l, const Mat& in, Mat& out) {
        out.noalias() = net.weight(l) * in;
        out.colwise() += net.bias(l);
    };
    layer(0, x, c.a[0]);
    leaky(c.a[0], s, c.h1);
    layer(1, c.h1, c.a[1]);
    leaky(c.a[1], s, c.z1);
    layer(2, c.z1, c.a[2]);
    leaky(c.a[2], s, c.h3);
    layer(3, c.h3, c.a[3]);
    leaky(c.a[3], s, c.z2);
    c.z2 += c.z1;
    layer(4, c.z2, c.a[4]);
    leaky(c.a[4], s, c.z3);
    c.z3 += c.z2;
    c.out.noalias() = net.weight(5).row(0) * c.z3;
    c.out.array() += net.bias(5)(0);
}

// Backpropagate d(out) (1 x B). Writes parameter gradients into `grad`
// (same layout as the parameter vector) when non-null and dL/dx into c.dx.
void backward(const NeuralUdf& net, const Mat& x, Cache& c, const Eigen::RowVectorXd& dout,
              ParameterVector* grad, const std::vector<std::size_t>& w_off,
              const std::vector<std::size_t>& b_off) {
    const double s = net.architecture().negative_slope;
    const auto& arch = net.architecture();
    auto store = [&](std::size_t l, const auto& delta, const Mat& in) {
        if (!grad) return;
        Eigen::Map<Mat> gw(grad->data() + w_off[l], static_cast<Eigen::Index>(arch.layer_outputs(l)),
                           static_cast<Eigen::Index>(arch.layer_inputs(l)));
        Eigen::Map<Eigen::VectorXd> gb(grad->data() + b_off[l],
                                       static_cast<Eigen::Index>(arch.layer_outputs(l)));
        gw.noalias() = delta * in.transpose();
        gb.noalias() = delta.rowwise().sum();
    };

    store(5, dout, c.z3);
    c.dz3.noalias() = net.weight(5).transpose() * dout;

    c.d5 = c.dz3;
    leaky_backward(c.d5, c.a[4], s);
    store(4, c.d5, c.z2);
    c.dz2 = c.dz3;
    c.dz2.noalias() += net.weight(4).transpose() * c.d5;

    c.d4 = c.dz2;
    leaky_backward(c.d4, c.a[3], s);
    store(3, c.d4, c.h3);
    c.d3.noalias() = net.weight(3).transpose() * c.d4;
    leaky_backward(c.d3, c.a[2], s);
    store(2, c.d3, c.z1);
    c.dz1 = c.dz2;
    c.dz1.noalias() += net.weight(2).transpose() * c.d3;

    c.d2 = c.dz1;
    leaky_backward(c.d2, c.a[1], s);
    store(1, c.d2, c.h1);
    c.d1.noalias() = net.weight(1).transpose() * c.d2;
    leaky_backward(c.d1, c.a[0], s);
    store(0, c.d1, x);
    if (!grad) c.dx.noalias() = net.weight(0).transpose() * c.d1;
}

Mat pack(std::span<const Vec3> xs) {
    Mat x(3, static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = xs[i];
    return x;
}

constexpr std::size_t kEvalChunk = 1024;

}  // namespace

Eigen::RowVectorXd NeuralUdf::forward(const Eigen::MatrixXd& x) const {
    Cache c;
    forward_cached(*this, x, c);
    return c.out;
}

std::vector<double> NeuralUdf::pre_activations(const Vec3& x) const {
    Cache c;
    forward_cached(*this, Mat(x), c);
    std::vector<double> out;
    for (const auto& a : c.a) out.insert(out.end(), a.data(), a.data() + a.size());
    return out;
}

double NeuralUdf::value(const Vec3& x) const {
    Mat m = x;
    return forward(m)(0);
}

Vec3 NeuralUdf::gradient(const Vec3& x) const {
    std::vector<Vec3> g;
    evaluate(std::span<const Vec3>(&x, 1), nullptr, &g);
    return g[0];
}

void NeuralUdf::evaluate(std::span<const Vec3> xs, std::vector<double>* values,
                         std::vector<Vec3>* gradients) const {
    if (values) values->resize(xs.size());
    if (gradients) gradients->resize(xs.size());
    std::vector<std::size_t> w_off(offsets_), b_off;
    for (std::size_t l = 0; l < MlpArchitecture::kLayers; ++l) b_off.push_back(bias_offset(l));
    Cache c;
    for (std::size_t begin = 0; begin < xs.size(); begin += kEvalChunk) {
        const std::size_t n = std::min(kEvalChunk, xs.size() - begin);
        const Mat x = pack(xs.subspan(begin, n));
        forward_cached(*this, x, c);
        if (values)
            for (std::size_t i = 0; i < n; ++i) (*values)[begin + i] = c.out(static_cast<Eigen::Index>(i));
        if (gradients) {
            backward(*this, x, c, Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(n)), nullptr, w_off, b_off);
            for (std::size_t i = 0; i < n; ++i) (*gradients)[begin + i] = c.dx.col(static_cast<Eigen::Index>(i));
        }
    }
}

class Trainer {
public:
    static NeuralUdf run(NeuralUdf net, std::span<const Vec3> inputs, std::span<const double> targets,
                         const TrainConfig& cfg) {
        cfg.validate();
        if (inputs.empty()) throw InvalidInputError("training data is empty");
        if (inputs.size() != targets.size()) throw InvalidInputError("inputs and targets differ in length");

        const std::size_t n = inputs.size();
        const std::size_t P = net.theta_.size();
        std::vector<std::size_t> b_off;
        for (std::size_t l = 0; l < MlpArchitecture::kLayers; ++l) b_off.push_back(net.bias_offset(l));

        ParameterVector grad(P), m(P, 0.0), v(P, 0.0);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(cfg.seed);
        Cache c;
        double b1t = 1.0, b2t = 1.0;
        net.meta_.loss_trace.clear();
        net.meta_.loss_trace.reserve(cfg.epochs);

        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
            for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
            double sse = 0.0;
            for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
                const std::size_t bs = std::min(cfg.batch_size, n - begin);
                Mat x(3, static_cast<Eigen::Index>(bs));
                Eigen::RowVectorXd y(static_cast<Eigen::Index>(bs));
                for (std::size_t i = 0; i < bs; ++i) {
                    x.col(static_cast<Eigen::Index>(i)) = inputs[order[begin + i]];
                    y(static_cast<Eigen::Index>(i)) = targets[order[begin + i]];
                }
                forward_cached(net, x, c);
                const Eigen::RowVectorXd r = c.out - y;
                const double batch_sse = r.squaredNorm();
                if (!std::isfinite(batch_sse)) {
                    throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch), static_cast<int>(epoch));
                }
                sse += batch_sse;
                const Eigen::RowVectorXd dout = (2.0 / static_cast<double>(bs)) * r;
                backward(net, x, c, dout, &grad, net.offsets_, b_off);

                b1t *= cfg.beta1;
                b2t *= cfg.beta2;
                const double step = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
                const double eps_hat = cfg.epsilon * std::sqrt(1.0 - b2t);
                Eigen::Map<Eigen::ArrayXd> g(grad.data(), static_cast<Eigen::Index>(P));
                Eigen::Map<Eigen::ArrayXd> mm(m.data(), static_cast<Eigen::Index>(P));
                Eigen::Map<Eigen::ArrayXd> vv(v.data(), static_cast<Eigen::Index>(P));
                Eigen::Map<Eigen::ArrayXd> th(net.theta_.data(), static_cast<Eigen::Index>(P));
                mm = cfg.beta1 * mm + (1.0 - cfg.beta1) * g;
                vv = cfg.beta2 * vv + (1.0 - cfg.beta2) * g.square();
                th -= step * mm / (vv.sqrt() + eps_hat);
            }
            net.meta_.loss_trace.push_back(sse / static_cast<double>(n));
        }
        net.meta_.epochs = cfg.epochs;
        net.meta_.train_seed = cfg.seed;
        net.meta_.final_loss = mean_squared_error(net, inputs, targets);
        if (!std::isfinite(net.meta_.final_loss)) {
            throw DivergenceError("non-finite training loss at epoch " + std::to_string(cfg.epochs), static_cast<int>(cfg.epochs));
        }
        return net;
    }
};

NeuralUdf train(NeuralUdf net, std::span<const Vec3> inputs, std::span<const double> targets,
                const TrainConfig& cfg) {
    return Trainer::run(std::move(net), inputs, targets, cfg);
}

NeuralUdf train(NeuralUdf net, const TrainingSet& data, const TrainConfig& cfg) {
    return Trainer::run(std::move(net), data.inputs, data.targets, cfg);
}

double mean_squared_error(const NeuralUdf& net, std::span<const Vec3> inputs,
                          std::span<const double> targets) {
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw InvalidInputError("mean squared error needs matching nonempty inputs and targets");
    }
    std::vector<double> f;
    net.evaluate(inputs, &f, nullptr);
    double sse = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sse += (f[i] - targets[i]) * (f[i] - targets[i]);
    return sse / static_cast<double>(f.size());
}

namespace {
constexpr const char* kCheckpointFormat = "ksudf-neural-udf";
constexpr int kCheckpointVersion = 1;
}  // namespace

std::string NeuralUdf::to_json() const {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["architecture"] = {{"hidden", arch_.hidden}, {"negative_slope", arch_.negative_slope}};
    j["metadata"] = {{"epochs", meta_.epochs},
                     {"final_loss", meta_.final_loss},
                     {"init_seed", meta_.init_seed},
                     {"train_seed", meta_.train_seed}};
    j["weights"] = std::vector<double>(theta_.begin(), theta_.end());
    return j.dump();
}

NeuralUdf NeuralUdf::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what(), e.byte);
    }
    try {
        if (j.at("format") != kCheckpointFormat || j.at("version") != kCheckpointVersion) {
            throw FormatError("unsupported checkpoint format", 0);
        }
        MlpArchitecture arch;
        arch.hidden = j.at("architecture").at("hidden").get<std::size_t>();
        arch.negative_slope = j.at("architecture").at("negative_slope").get<double>();
        NeuralUdf net(arch);
        auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != net.theta_.size()) throw FormatError("checkpoint weight count does not match", 0);
        net.theta_.assign(w.begin(), w.end());
        const auto& m = j.at("metadata");
        net.meta_.epochs = m.at("epochs").get<std::size_t>();
        net.meta_.final_loss = m.at("final_loss").get<double>();
        net.meta_.init_seed = m.at("init_seed").get<std::uint64_t>();
        net.meta_.train_seed = m.at("train_seed").get<std::uint64_t>();
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what(), 0);
    }
}

void NeuralUdf::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << to_json() << '\n';
}

NeuralUdf NeuralUdf::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void write_loss_csv(const std::vector<double>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out.precision(17);
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) out << i + 1 << ',' << trace[i] << '\n';
}

}  // namespace ksudf
