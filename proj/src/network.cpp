#include "volnet/network.hpp"

#include "volnet/error.hpp"
#include "volnet/rng.hpp"
#include "volnet/text.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace volnet::nn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Architecture arch)
{
    return arch == Architecture::MLFF ? "MLFF" : "CFFN";
}

std::string_view long_name(Architecture arch)
{
    return arch == Architecture::MLFF ? "Multi-Layer Feed Forward Network" : "Cascade Feed Forward Network";
}

std::optional<Architecture> architecture_from_string(std::string_view name)
{
    if (name == "MLFF") return Architecture::MLFF;
    if (name == "CFFN") return Architecture::CFFN;
    return std::nullopt;
}

std::size_t Topology::parameter_count() const
{
    std::size_t count = n_hidden * n_inputs + n_hidden + n_outputs * n_hidden + n_outputs;
    if (has_skip()) count += n_outputs * n_inputs;
    return count;
}

void Topology::validate() const
{
    if (n_inputs == 0 || n_hidden == 0 || n_outputs == 0) {
        throw Error(ErrorKind::InvalidArgument, "topology counts must be at least 1");
    }
}

Network::Network(const Topology& topo) : topology(topo)
{
    topo.validate();
    const auto ni = static_cast<Index>(topo.n_inputs);
    const auto nh = static_cast<Index>(topo.n_hidden);
    const auto no = static_cast<Index>(topo.n_outputs);
    w_ih = MatrixXd::Zero(nh, ni);
    b_h = VectorXd::Zero(nh);
    if (topo.has_skip()) w_io = MatrixXd::Zero(no, ni);
    w_ho = MatrixXd::Zero(no, nh);
    b_o = VectorXd::Zero(no);
}

namespace {

template <typename Fn>
void for_each_block(Network& net, Fn&& fn)
{
    fn(net.w_ih);
    fn(net.b_h);
    if (net.w_io) fn(*net.w_io);
    fn(net.w_ho);
    fn(net.b_o);
}

template <typename Fn>
void for_each_block(const Network& net, Fn&& fn)
{
    fn(net.w_ih);
    fn(net.b_h);
    if (net.w_io) fn(*net.w_io);
    fn(net.w_ho);
    fn(net.b_o);
}

}  // namespace

VectorXd Network::flatten() const
{
    VectorXd out(static_cast<Index>(topology.parameter_count()));
    Index k = 0;
    for_each_block(*this, [&](const auto& block) {
        for (Index r = 0; r < block.rows(); ++r)
            for (Index c = 0; c < block.cols(); ++c) out(k++) = block(r, c);
    });
    return out;
}

void Network::unflatten(const VectorXd& params)
{
    if (params.size() != static_cast<Index>(topology.parameter_count())) {
        throw Error(ErrorKind::DimensionMismatch,
                    "parameter vector has " + std::to_string(params.size()) + " entries, expected " +
                        std::to_string(topology.parameter_count()));
    }
    Index k = 0;
    for_each_block(*this, [&](auto& block) {
        for (Index r = 0; r < block.rows(); ++r)
            for (Index c = 0; c < block.cols(); ++c) block(r, c) = params(k++);
    });
}

Network Network::from_params(const Topology& topo, const VectorXd& params)
{
    Network net(topo);
    net.unflatten(params);
    return net;
}

Network init_weights(const Topology& topo, std::uint64_t seed)
{
    Network net(topo);
    net.seed = seed;
    Rng rng(seed);
    auto fill = [&](MatrixXd& m, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
    };
    const std::size_t out_fan_in = topo.n_hidden + (topo.has_skip() ? topo.n_inputs : 0);
    fill(net.w_ih, topo.n_inputs);
    if (net.w_io) fill(*net.w_io, out_fan_in);
    fill(net.w_ho, out_fan_in);
    return net;
}

ForwardTrace forward(const Network& net, const VectorXd& x)
{
    if (x.size() != static_cast<Index>(net.topology.n_inputs)) {
        throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                      " entries, network expects " +
                                                      std::to_string(net.topology.n_inputs));
    }
    ForwardTrace t;
    t.input = x;
    t.hidden_input = net.w_ih * x;
    t.hidden_input += net.b_h;
    t.hidden = t.hidden_input.array().tanh().matrix();
    t.output = net.w_ho * t.hidden;
    t.output += net.b_o;
    if (net.w_io) t.output += *net.w_io * x;
    return t;
}

namespace {

void check_inputs(const Network& net, const MatrixXd& X)
{
    if (X.cols() != static_cast<Index>(net.topology.n_inputs)) {
        throw Error(ErrorKind::DimensionMismatch, "input matrix has " + std::to_string(X.cols()) +
                                                      " columns, network expects " +
                                                      std::to_string(net.topology.n_inputs));
    }
}

void check_targets(const Network& net, const MatrixXd& X, const MatrixXd& Y)
{
    check_inputs(net, X);
    if (Y.rows() != X.rows() || Y.cols() != static_cast<Index>(net.topology.n_outputs)) {
        throw Error(ErrorKind::DimensionMismatch, "target matrix shape does not match inputs/outputs");
    }
    if (X.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "no samples");
}

MatrixXd hidden_activations(const Network& net, const MatrixXd& X)
{
    MatrixXd h = X * net.w_ih.transpose();
    h.rowwise() += net.b_h.transpose();
    return h.array().tanh().matrix();
}

MatrixXd output_from_hidden(const Network& net, const MatrixXd& X, const MatrixXd& H)
{
    MatrixXd y = H * net.w_ho.transpose();
    y.rowwise() += net.b_o.transpose();
    if (net.w_io) y += X * net.w_io->transpose();
    return y;
}

}  // namespace

MatrixXd predict(const Network& net, const MatrixXd& X)
{
    check_inputs(net, X);
    return output_from_hidden(net, X, hidden_activations(net, X));
}

double mean_squared(const MatrixXd& predicted, const MatrixXd& target)
{
    if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "prediction/target shape mismatch");
    }
    double sum = 0.0;
    for (Index r = 0; r < predicted.rows(); ++r) {
        for (Index c = 0; c < predicted.cols(); ++c) {
            const double d = predicted(r, c) - target(r, c);
            sum += d * d;
        }
    }
    return sum / static_cast<double>(predicted.size());
}

double batch_loss(const Network& net, const MatrixXd& X, const MatrixXd& Y)
{
    check_targets(net, X, Y);
    return mean_squared(predict(net, X), Y);
}

VectorXd gradient(const Network& net, const MatrixXd& X, const MatrixXd& Y)
{
    check_targets(net, X, Y);
    const MatrixXd H = hidden_activations(net, X);
    const MatrixXd P = output_from_hidden(net, X, H);
    const double scale = 2.0 / static_cast<double>(P.size());
    const MatrixXd E = scale * (P - Y);  // N x n_out, dL/dy

    Network grad(net.topology);
    grad.w_ho = E.transpose() * H;
    grad.b_o = E.colwise().sum().transpose();
    if (grad.w_io) *grad.w_io = E.transpose() * X;
    const MatrixXd delta = ((E * net.w_ho).array() * (1.0 - H.array().square())).matrix();
    grad.w_ih = delta.transpose() * X;
    grad.b_h = delta.colwise().sum().transpose();
    return grad.flatten();
}

MatrixXd jacobian(const Network& net, const MatrixXd& X)
{
    check_inputs(net, X);
    if (X.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "no samples");
    const auto& topo = net.topology;
    const auto ni = static_cast<Index>(topo.n_inputs);
    const auto nh = static_cast<Index>(topo.n_hidden);
    const auto no = static_cast<Index>(topo.n_outputs);
    const Index off_bh = nh * ni;
    const Index off_io = off_bh + nh;
    const Index off_ho = off_io + (topo.has_skip() ? no * ni : 0);
    const Index off_bo = off_ho + no * nh;

    const MatrixXd H = hidden_activations(net, X);
    MatrixXd J = MatrixXd::Zero(X.rows() * no, static_cast<Index>(topo.parameter_count()));
    for (Index s = 0; s < X.rows(); ++s) {
        for (Index o = 0; o < no; ++o) {
            const Index row = s * no + o;
            for (Index j = 0; j < nh; ++j) {
                const double z = H(s, j);
                const double back = net.w_ho(o, j) * (1.0 - z * z);
                for (Index k = 0; k < ni; ++k) J(row, j * ni + k) = back * X(s, k);
                J(row, off_bh + j) = back;
                J(row, off_ho + o * nh + j) = z;
            }
            if (topo.has_skip()) {
                for (Index k = 0; k < ni; ++k) J(row, off_io + o * ni + k) = X(s, k);
            }
            J(row, off_bo + o) = 1.0;
        }
    }
    return J;
}

void save_network(std::ostream& out, const Network& net)
{
    const auto& t = net.topology;
    out << "volnet-network 1 " << to_string(t.architecture) << ' ' << t.n_inputs << ' ' << t.n_hidden << ' '
        << t.n_outputs << ' ' << net.seed << '\n';
    const VectorXd p = net.flatten();
    for (Index i = 0; i < p.size(); ++i) out << text::format_exact(p(i)) << '\n';
}

Network load_network(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header)) throw Error(ErrorKind::EmptyFile, "empty network file");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    std::string arch;
    Topology topo;
    std::uint64_t seed = 0;
    if (!(hs >> magic >> version >> arch >> topo.n_inputs >> topo.n_hidden >> topo.n_outputs >> seed) ||
        magic != "volnet-network" || version != 1) {
        throw Error(ErrorKind::MalformedRow, "bad network header: " + header);
    }
    const auto a = architecture_from_string(arch);
    if (!a) throw Error(ErrorKind::MalformedRow, "unknown architecture " + arch);
    topo.architecture = *a;
    topo.validate();

    VectorXd params(static_cast<Index>(topo.parameter_count()));
    std::string line;
    for (Index i = 0; i < params.size(); ++i) {
        if (!std::getline(in, line)) throw Error(ErrorKind::TooShort, "network file ends early");
        if (!text::parse_double(line, params(i))) {
            throw Error(ErrorKind::MalformedRow, "bad parameter value: " + line);
        }
    }
    Network net = Network::from_params(topo, params);
    net.seed = seed;
    return net;
}

}  // namespace volnet::nn
