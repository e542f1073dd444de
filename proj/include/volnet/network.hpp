/**
 * @file network.hpp
 * @brief Single-hidden-layer feedforward networks (MLFF and cascade-forward).
 *
 * Hidden units use tanh, output units are linear. The cascade-forward variant adds a
 * direct linear block from the inputs to the outputs:
 *
 *     z = tanh(W_ih x + b_h)
 *     y = W_ho z + b_o            (MLFF)
 *     y = W_ho z + b_o + W_io x   (CFFN)
 *
 * Parameter vector layout: W_ih row-major, b_h, W_io row-major (CFFN only), W_ho
 * row-major, b_o.
 *
 * Loss is the mean over samples and outputs of the squared error, so the gradient is
 * (2 / (N * n_out)) * J^T * (y_pred - y_target).
 */
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace volnet::nn {

enum class Architecture { MLFF, CFFN };

std::string_view to_string(Architecture arch);
std::string_view long_name(Architecture arch);
std::optional<Architecture> architecture_from_string(std::string_view name);

struct Topology {
    Architecture architecture = Architecture::MLFF;
    std::size_t n_inputs = 7;
    std::size_t n_hidden = 20;
    std::size_t n_outputs = 2;

    std::size_t parameter_count() const;
    bool has_skip() const { return architecture == Architecture::CFFN; }
    /// Throws InvalidArgument on any zero count.
    void validate() const;

    bool operator==(const Topology&) const = default;
};

struct Network {
    Topology topology;
    Eigen::MatrixXd w_ih;                 ///< n_hidden x n_inputs
    Eigen::VectorXd b_h;                  ///< n_hidden
    std::optional<Eigen::MatrixXd> w_io;  ///< n_outputs x n_inputs, CFFN only
    Eigen::MatrixXd w_ho;                 ///< n_outputs x n_hidden
    Eigen::VectorXd b_o;                  ///< n_outputs
    std::uint64_t seed = 0;

    /// All-zero network of the given shape.
    explicit Network(const Topology& topo);

    Eigen::VectorXd flatten() const;
    /// Throws DimensionMismatch when the length is not parameter_count().
    void unflatten(const Eigen::VectorXd& params);
    static Network from_params(const Topology& topo, const Eigen::VectorXd& params);
};

/// Uniform weights in +-1/sqrt(fan_in) of each receiving unit, zero biases. An output
/// unit of a CFFN receives n_hidden + n_inputs connections.
Network init_weights(const Topology& topo, std::uint64_t seed);

struct ForwardTrace {
    Eigen::VectorXd input;
    Eigen::VectorXd hidden_input;  ///< W_ih x + b_h
    Eigen::VectorXd hidden;        ///< tanh of the above
    Eigen::VectorXd output;
};

ForwardTrace forward(const Network& net, const Eigen::VectorXd& x);

/// Row-wise forward pass; result is rows x n_outputs.
Eigen::MatrixXd predict(const Network& net, const Eigen::MatrixXd& X);

double batch_loss(const Network& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Gradient of batch_loss in parameter-vector layout.
Eigen::VectorXd gradient(const Network& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// d y[s, o] / d params, one row per (sample, output) pair ordered sample-major.
Eigen::MatrixXd jacobian(const Network& net, const Eigen::MatrixXd& X);

/// Mean of squared (pred - target) over all entries, accumulated row by row.
double mean_squared(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& target);

/// Text format:
///   volnet-network 1 <MLFF|CFFN> <n_inputs> <n_hidden> <n_outputs> <seed>
///   <one parameter per line, 17 significant digits>
void save_network(std::ostream& out, const Network& net);
Network load_network(std::istream& in);

}  // namespace volnet::nn
