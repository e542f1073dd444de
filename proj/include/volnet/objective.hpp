#pragma once

#include "volnet/network.hpp"

#include <Eigen/Dense>

namespace volnet::train {

/// A differentiable loss over a flat parameter vector. Trainers see only this.
class Objective {
public:
    virtual ~Objective() = default;

    virtual Eigen::Index dimension() const = 0;
    virtual double value(const Eigen::VectorXd& w) const = 0;
    virtual double value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const = 0;

    /// True when value(w) == residual_weight() * |r(w)|^2 for some residual vector r.
    virtual bool has_residuals() const { return false; }
    virtual double residual_weight() const { return 1.0; }
    /// Fills r(w) and its Jacobian dr/dw. Throws InvalidArgument when unsupported.
    virtual void residuals(const Eigen::VectorXd& w, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const;
};

/// Mean squared error of a network over a fixed (scaled) data set.
class NetworkObjective final : public Objective {
public:
    /// X and Y must outlive the objective.
    NetworkObjective(const nn::Topology& topology, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

    Eigen::Index dimension() const override;
    double value(const Eigen::VectorXd& w) const override;
    double value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const override;

    bool has_residuals() const override { return true; }
    double residual_weight() const override;
    void residuals(const Eigen::VectorXd& w, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const override;

private:
    nn::Topology topology_;
    const Eigen::MatrixXd& X_;
    const Eigen::MatrixXd& Y_;
};

}  // namespace volnet::train
