#include "volnet/objective.hpp"

#include "volnet/error.hpp"

namespace volnet::train {

void Objective::residuals(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&) const
{
    throw Error(ErrorKind::InvalidArgument, "objective has no residual form");
}

NetworkObjective::NetworkObjective(const nn::Topology& topology, const Eigen::MatrixXd& X,
                                   const Eigen::MatrixXd& Y)
    : topology_(topology), X_(X), Y_(Y)
{
    topology_.validate();
    if (X.rows() < 1 || X.rows() != Y.rows() || X.cols() != static_cast<Eigen::Index>(topology.n_inputs) ||
        Y.cols() != static_cast<Eigen::Index>(topology.n_outputs)) {
        throw Error(ErrorKind::DimensionMismatch, "data does not match network topology");
    }
}

Eigen::Index NetworkObjective::dimension() const
{
    return static_cast<Eigen::Index>(topology_.parameter_count());
}

double NetworkObjective::value(const Eigen::VectorXd& w) const
{
    return nn::batch_loss(nn::Network::from_params(topology_, w), X_, Y_);
}

double NetworkObjective::value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const
{
    const auto net = nn::Network::from_params(topology_, w);
    grad = nn::gradient(net, X_, Y_);
    return nn::batch_loss(net, X_, Y_);
}

double NetworkObjective::residual_weight() const
{
    return 1.0 / static_cast<double>(Y_.size());
}

void NetworkObjective::residuals(const Eigen::VectorXd& w, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const
{
    const auto net = nn::Network::from_params(topology_, w);
    const Eigen::MatrixXd pred = nn::predict(net, X_);
    r.resize(pred.size());
    Eigen::Index k = 0;
    for (Eigen::Index s = 0; s < pred.rows(); ++s)
        for (Eigen::Index o = 0; o < pred.cols(); ++o) r(k++) = pred(s, o) - Y_(s, o);
    jac = nn::jacobian(net, X_);
}

}  // namespace volnet::train
