#include "archemb/net.hpp"

#include <cmath>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

namespace {

int argmax_lowest(const Eigen::RowVectorXd& row) {
    int best = 0;
    for (int c = 1; c < row.size(); ++c)
        if (row[c] > row[best]) best = c;  // strict: ties keep the lowest index
    return best;
}

Eigen::MatrixXd he_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd w(rows, cols);
    const double scale = std::sqrt(2.0 / static_cast<double>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = scale * rng.normal();
    return w;
}

// ---------------------------------------------------------------------------
// Topology family: residual stack of DAG cells.
// node 0 is the cell input; node j sums its incoming edge op outputs;
// the cell adds its last node back onto the stream, so an all-Zero cell
// is the identity.
// ---------------------------------------------------------------------------

struct TopoPlan {
    std::vector<std::pair<int, int>> edges;
    std::vector<EdgeOp> ops;             // per edge
    std::vector<std::vector<int>> slot;  // [cell][edge] -> weight index, -1 if none
    int w_in = 0;
    int w_out = 0;
    int n_cells = 0;
    int n_nodes = 0;
};

TopoPlan make_plan(const SearchSpaceSpec& space, const Genotype& g) {
    TopoPlan plan;
    plan.edges = space.edges();
    plan.n_nodes = space.n_nodes;
    plan.n_cells = space.cell_stack_count;
    plan.ops.reserve(g.genes.size());
    for (std::uint8_t gene : g.genes) plan.ops.push_back(space.edge_ops[gene]);
    int next = 1;
    plan.slot.assign(plan.n_cells, std::vector<int>(plan.edges.size(), -1));
    for (int c = 0; c < plan.n_cells; ++c)
        for (std::size_t e = 0; e < plan.edges.size(); ++e)
            if (plan.ops[e] == EdgeOp::LinearReLU) plan.slot[c][e] = next++;
    plan.w_out = next;
    return plan;
}

struct TopoTrace {
    Eigen::MatrixXd u_in;                             // pre-activation of the input layer
    std::vector<Eigen::MatrixXd> cell_in;             // stream value entering each cell
    std::vector<std::vector<Eigen::MatrixXd>> node;   // [cell][node] values
    std::vector<std::vector<Eigen::MatrixXd>> pre;    // [cell][edge] LinearReLU pre-activations
    Eigen::MatrixXd h_final;
};

Eigen::MatrixXd topo_forward(const NetworkParams& p, const TopoPlan& plan,
                             const Eigen::MatrixXd& X, TopoTrace* trace) {
    const auto& w = p.weights;
    Eigen::MatrixXd u_in = X * w[plan.w_in].transpose();
    Eigen::MatrixXd h = u_in.cwiseMax(0.0);
    if (trace) {
        trace->u_in = u_in;
        trace->cell_in.resize(plan.n_cells);
        trace->node.assign(plan.n_cells, {});
        trace->pre.assign(plan.n_cells, std::vector<Eigen::MatrixXd>(plan.edges.size()));
    }
    for (int c = 0; c < plan.n_cells; ++c) {
        std::vector<Eigen::MatrixXd> node(plan.n_nodes);
        node[0] = h;
        for (int j = 1; j < plan.n_nodes; ++j)
            node[j] = Eigen::MatrixXd::Zero(X.rows(), w[plan.w_in].rows());
        for (std::size_t e = 0; e < plan.edges.size(); ++e) {
            const auto [src, dst] = plan.edges[e];
            switch (plan.ops[e]) {
                case EdgeOp::Zero: break;
                case EdgeOp::Identity: node[dst] += node[src]; break;
                case EdgeOp::LinearReLU: {
                    Eigen::MatrixXd u = node[src] * w[plan.slot[c][e]].transpose();
                    node[dst] += u.cwiseMax(0.0);
                    if (trace) trace->pre[c][e] = std::move(u);
                    break;
                }
            }
        }
        if (trace) {
            trace->cell_in[c] = h;
            trace->node[c] = node;
        }
        h += node[plan.n_nodes - 1];
    }
    if (trace) trace->h_final = h;
    return h * w[plan.w_out].transpose();
}

std::vector<Eigen::MatrixXd> topo_backward(const NetworkParams& p, const TopoPlan& plan,
                                           const Eigen::MatrixXd& X, const TopoTrace& trace,
                                           const Eigen::MatrixXd& d_logits) {
    const auto& w = p.weights;
    std::vector<Eigen::MatrixXd> grads(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        grads[i] = Eigen::MatrixXd::Zero(w[i].rows(), w[i].cols());

    grads[plan.w_out] = d_logits.transpose() * trace.h_final;
    Eigen::MatrixXd a = d_logits * w[plan.w_out];  // adjoint of the stream
    for (int c = plan.n_cells - 1; c >= 0; --c) {
        std::vector<Eigen::MatrixXd> adj(plan.n_nodes,
                                         Eigen::MatrixXd::Zero(a.rows(), a.cols()));
        adj[plan.n_nodes - 1] = a;
        for (int j = plan.n_nodes - 1; j >= 1; --j) {
            for (std::size_t e = 0; e < plan.edges.size(); ++e) {
                const auto [src, dst] = plan.edges[e];
                if (dst != j) continue;
                switch (plan.ops[e]) {
                    case EdgeOp::Zero: break;
                    case EdgeOp::Identity: adj[src] += adj[j]; break;
                    case EdgeOp::LinearReLU: {
                        const int s = plan.slot[c][e];
                        Eigen::MatrixXd d =
                            (trace.pre[c][e].array() > 0.0).cast<double>() * adj[j].array();
                        grads[s] += d.transpose() * trace.node[c][src];
                        adj[src] += d * w[s];
                        break;
                    }
                }
            }
        }
        a += adj[0];  // residual skip + DAG input node
    }
    Eigen::MatrixXd d_in = (trace.u_in.array() > 0.0).cast<double>() * a.array();
    grads[plan.w_in] = d_in.transpose() * X;
    return grads;
}

/// Gradient of seed . logits with respect to a single input row.
Eigen::VectorXd topo_input_gradient(const NetworkParams& p, const TopoPlan& plan,
                                    const TopoTrace& trace, const Eigen::VectorXd& seed) {
    const auto& w = p.weights;
    Eigen::VectorXd a = w[plan.w_out].transpose() * seed;
    for (int c = plan.n_cells - 1; c >= 0; --c) {
        std::vector<Eigen::VectorXd> adj(plan.n_nodes, Eigen::VectorXd::Zero(a.size()));
        adj[plan.n_nodes - 1] = a;
        for (int j = plan.n_nodes - 1; j >= 1; --j) {
            for (std::size_t e = 0; e < plan.edges.size(); ++e) {
                const auto [src, dst] = plan.edges[e];
                if (dst != j) continue;
                switch (plan.ops[e]) {
                    case EdgeOp::Zero: break;
                    case EdgeOp::Identity: adj[src] += adj[j]; break;
                    case EdgeOp::LinearReLU: {
                        Eigen::VectorXd d =
                            (trace.pre[c][e].row(0).transpose().array() > 0.0).cast<double>() *
                            adj[j].array();
                        adj[src] += w[plan.slot[c][e]].transpose() * d;
                        break;
                    }
                }
            }
        }
        a += adj[0];
    }
    Eigen::VectorXd d_in =
        (trace.u_in.row(0).transpose().array() > 0.0).cast<double>() * a.array();
    return p.weights[plan.w_in].transpose() * d_in;
}

Eigen::MatrixXd topo_full_jacobian(const NetworkParams& p, const TopoPlan& plan,
                                   const Eigen::VectorXd& x) {
    const auto& w = p.weights;
    const Eigen::VectorXd u = w[plan.w_in] * x;
    const Eigen::ArrayXd m_in = (u.array() > 0.0).cast<double>();
    Eigen::VectorXd h = (u.array() * m_in).matrix();
    Eigen::MatrixXd jh = m_in.matrix().asDiagonal() * w[plan.w_in];
    for (int c = 0; c < plan.n_cells; ++c) {
        std::vector<Eigen::VectorXd> v(plan.n_nodes, Eigen::VectorXd::Zero(h.size()));
        std::vector<Eigen::MatrixXd> jv(plan.n_nodes,
                                        Eigen::MatrixXd::Zero(jh.rows(), jh.cols()));
        v[0] = h;
        jv[0] = jh;
        for (std::size_t e = 0; e < plan.edges.size(); ++e) {
            const auto [src, dst] = plan.edges[e];
            switch (plan.ops[e]) {
                case EdgeOp::Zero: break;
                case EdgeOp::Identity:
                    v[dst] += v[src];
                    jv[dst] += jv[src];
                    break;
                case EdgeOp::LinearReLU: {
                    const auto& we = w[plan.slot[c][e]];
                    const Eigen::VectorXd q = we * v[src];
                    const Eigen::ArrayXd m = (q.array() > 0.0).cast<double>();
                    v[dst] += (q.array() * m).matrix();
                    jv[dst] += m.matrix().asDiagonal() * (we * jv[src]);
                    break;
                }
            }
        }
        h += v[plan.n_nodes - 1];
        jh += jv[plan.n_nodes - 1];
    }
    return w[plan.w_out] * jh;
}

// ---------------------------------------------------------------------------
// Chain helpers shared by the size family and the teacher.
// ---------------------------------------------------------------------------

struct ChainTrace {
    std::vector<Eigen::MatrixXd> value;  // value[l] = input to layer l; back() = final hidden
    std::vector<Eigen::MatrixXd> pre;    // pre-activation of each ReLU layer
};

Eigen::MatrixXd chain_forward(const std::vector<Eigen::MatrixXd>& w,
                              const std::vector<char>& relu_after, const Eigen::MatrixXd& X,
                              ChainTrace* trace) {
    Eigen::MatrixXd h = X;
    if (trace) {
        trace->value.clear();
        trace->pre.assign(w.size(), {});
    }
    for (std::size_t l = 0; l < w.size(); ++l) {
        if (trace) trace->value.push_back(h);
        Eigen::MatrixXd u = h * w[l].transpose();
        if (relu_after[l]) {
            if (trace) trace->pre[l] = u;
            h = u.cwiseMax(0.0);
        } else {
            h = std::move(u);
        }
    }
    return h;
}

std::vector<Eigen::MatrixXd> chain_backward(const std::vector<Eigen::MatrixXd>& w,
                                            const std::vector<char>& relu_after,
                                            const ChainTrace& trace,
                                            const Eigen::MatrixXd& d_out) {
    std::vector<Eigen::MatrixXd> grads(w.size());
    Eigen::MatrixXd a = d_out;
    for (int l = static_cast<int>(w.size()) - 1; l >= 0; --l) {
        Eigen::MatrixXd d = relu_after[l]
                                ? ((trace.pre[l].array() > 0.0).cast<double>() * a.array()).matrix()
                                : a;
        grads[l] = d.transpose() * trace.value[l];
        if (l > 0) a = d * w[l];
    }
    return grads;
}

std::vector<char> size_relu_flags(std::size_t n_weights) {
    std::vector<char> flags(n_weights, 1);
    flags.back() = 0;  // output map is linear
    return flags;
}

void check_finite_input(const Eigen::MatrixXd& X) {
    if (!X.allFinite()) throw NumericError("non-finite network input");
}

}  // namespace

// ---------------------------------------------------------------------------
// MlpChain
// ---------------------------------------------------------------------------

Eigen::MatrixXd MlpChain::forward_batch(const Eigen::MatrixXd& X) const {
    return chain_forward(weights, relu_after, X, nullptr);
}

Eigen::VectorXd MlpChain::forward(const Eigen::VectorXd& x) const {
    return forward_batch(x.transpose()).row(0);
}

Eigen::MatrixXd MlpChain::full_jacobian(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h = x;
    Eigen::MatrixXd j = Eigen::MatrixXd::Identity(x.size(), x.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Eigen::VectorXd u = weights[l] * h;
        Eigen::MatrixXd ju = weights[l] * j;
        if (relu_after[l]) {
            const Eigen::ArrayXd m = (u.array() > 0.0).cast<double>();
            h = (u.array() * m).matrix();
            j = m.matrix().asDiagonal() * ju;
        } else {
            h = std::move(u);
            j = std::move(ju);
        }
    }
    return j;
}

Eigen::VectorXd MlpChain::vjp(const Eigen::VectorXd& x, const Eigen::VectorXd& seed) const {
    ChainTrace trace;
    chain_forward(weights, relu_after, x.transpose(), &trace);
    Eigen::VectorXd a = seed;
    for (int l = static_cast<int>(weights.size()) - 1; l >= 0; --l) {
        if (relu_after[l])
            a = ((trace.pre[l].row(0).transpose().array() > 0.0).cast<double>() * a.array())
                    .matrix();
        a = weights[l].transpose() * a;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

namespace {

MlpChain make_teacher() {
    Rng rng(derive_seed("dataset.teacher", kTeacherSeed));
    MlpChain t;
    t.weights.push_back(he_matrix(32, 16, rng));
    t.weights.push_back(he_matrix(32, 32, rng));
    t.weights.push_back(he_matrix(4, 32, rng));
    t.relu_after = {1, 1, 0};
    return t;
}

const MlpChain& teacher() {
    static const MlpChain t = make_teacher();
    return t;
}

}  // namespace

Eigen::MatrixXd teacher_logits(const Eigen::MatrixXd& inputs) {
    return teacher().forward_batch(inputs);
}

DatasetPair gen_dataset(std::uint64_t seed, int n_train, int n_test) {
    if (n_train < 1 || n_test < 1) throw ConfigError("dataset sizes must be >= 1");
    Rng rng(derive_seed("dataset.inputs", seed));
    const int total = n_train + n_test;
    Eigen::MatrixXd points(total, 16);
    for (int i = 0; i < total; ++i) {
        for (int d = 0; d < 16; ++d) points(i, d) = rng.normal();
        points.row(i) /= points.row(i).norm();
    }
    const Eigen::MatrixXd logits = teacher_logits(points);
    DatasetPair out;
    auto fill = [&](Dataset& ds, int offset, int n, const char* split) {
        ds.inputs = points.middleRows(offset, n);
        ds.labels.resize(n);
        for (int i = 0; i < n; ++i) ds.labels[i] = argmax_lowest(logits.row(offset + i));
        ds.split = split;
        ds.seed = seed;
    };
    fill(out.train, 0, n_train, "train");
    fill(out.test, n_train, n_test, "test");
    return out;
}

// ---------------------------------------------------------------------------
// Instantiation and evaluation
// ---------------------------------------------------------------------------

NetworkParams instantiate(const SearchSpaceSpec& space, const Genotype& g,
                          std::uint64_t init_seed) {
    NetworkParams p;
    p.space = space;
    p.genotype = g;
    p.init_seed = init_seed;
    Rng rng(derive_seed("net.init", fnv1a64(format_genotype(g)), init_seed));
    if (space.family == Family::Topology) {
        const TopoPlan plan = make_plan(space, g);
        p.weights.push_back(he_matrix(space.fixed_width, space.input_dim, rng));
        for (int c = 0; c < plan.n_cells; ++c)
            for (std::size_t e = 0; e < plan.edges.size(); ++e)
                if (plan.slot[c][e] >= 0)
                    p.weights.push_back(he_matrix(space.fixed_width, space.fixed_width, rng));
        p.weights.push_back(he_matrix(space.n_classes, space.fixed_width, rng));
    } else {
        int prev = space.input_dim;
        for (std::uint8_t gene : g.genes) {
            const int width = space.width_choices[gene];
            p.weights.push_back(he_matrix(width, prev, rng));
            prev = width;
        }
        p.weights.push_back(he_matrix(space.n_classes, prev, rng));
    }
    return p;
}

Eigen::MatrixXd forward_batch(const NetworkParams& p, const Eigen::MatrixXd& X) {
    check_finite_input(X);
    if (p.space.family == Family::Topology)
        return topo_forward(p, make_plan(p.space, p.genotype), X, nullptr);
    return chain_forward(p.weights, size_relu_flags(p.weights.size()), X, nullptr);
}

Eigen::VectorXd forward(const NetworkParams& p, const Eigen::VectorXd& x) {
    return forward_batch(p, x.transpose()).row(0);
}

Eigen::MatrixXd full_jacobian(const NetworkParams& p, const Eigen::VectorXd& x) {
    check_finite_input(x);
    if (p.space.family == Family::Topology)
        return topo_full_jacobian(p, make_plan(p.space, p.genotype), x);
    MlpChain chain{p.weights, size_relu_flags(p.weights.size())};
    return chain.full_jacobian(x);
}

Eigen::VectorXd data_jacobian(const NetworkParams& p, const Eigen::VectorXd& x,
                              OutputReduce reduce) {
    check_finite_input(x);
    if (p.space.family == Family::Topology) {
        const TopoPlan plan = make_plan(p.space, p.genotype);
        TopoTrace trace;
        const Eigen::MatrixXd logits = topo_forward(p, plan, x.transpose(), &trace);
        Eigen::VectorXd seed = Eigen::VectorXd::Ones(logits.cols());
        if (reduce == OutputReduce::L1)
            seed = logits.row(0).transpose().array().sign().matrix();
        return topo_input_gradient(p, plan, trace, seed);
    }
    MlpChain chain{p.weights, size_relu_flags(p.weights.size())};
    Eigen::VectorXd logits = chain.forward(x);
    Eigen::VectorXd seed = Eigen::VectorXd::Ones(logits.size());
    if (reduce == OutputReduce::L1) seed = logits.array().sign().matrix();
    return chain.vjp(x, seed);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

double accuracy_from_logits(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
    int correct = 0;
    for (int i = 0; i < logits.rows(); ++i)
        if (argmax_lowest(logits.row(i)) == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

double test_accuracy(const NetworkParams& p, const Dataset& d) {
    return accuracy_from_logits(forward_batch(p, d.inputs), d.labels);
}

TrainResult train(const NetworkParams& p, const DatasetPair& data, const TrainConfig& cfg,
                  bool keep_checkpoints) {
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");

    TrainResult result;
    result.params = p;
    auto& w = result.params.weights;

    const bool topo = p.space.family == Family::Topology;
    const TopoPlan plan = topo ? make_plan(p.space, p.genotype) : TopoPlan{};
    const std::vector<char> flags = topo ? std::vector<char>{} : size_relu_flags(w.size());

    const int n = static_cast<int>(data.train.inputs.rows());
    const int steps_per_epoch = n / cfg.batch_size;  // incomplete batches dropped
    const long total_steps = static_cast<long>(steps_per_epoch) * cfg.epochs;

    std::vector<Eigen::MatrixXd> velocity(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        velocity[i] = Eigen::MatrixXd::Zero(w[i].rows(), w[i].cols());

    if (keep_checkpoints) result.checkpoints.push_back(w);

    Rng shuffle_rng(derive_seed("net.train", cfg.seed));
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (int b = 0; b < steps_per_epoch; ++b) {
            Eigen::MatrixXd X(cfg.batch_size, data.train.inputs.cols());
            std::vector<int> y(static_cast<std::size_t>(cfg.batch_size));
            for (int i = 0; i < cfg.batch_size; ++i) {
                const std::size_t src = order[static_cast<std::size_t>(b * cfg.batch_size + i)];
                X.row(i) = data.train.inputs.row(static_cast<Eigen::Index>(src));
                y[static_cast<std::size_t>(i)] = data.train.labels[src];
            }

            TopoTrace topo_trace;
            ChainTrace chain_trace;
            Eigen::MatrixXd logits =
                topo ? topo_forward(result.params, plan, X, &topo_trace)
                     : chain_forward(w, flags, X, &chain_trace);

            // softmax cross-entropy
            const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
            Eigen::MatrixXd z = (logits.colwise() - row_max).array().exp();
            const Eigen::VectorXd row_sum = z.rowwise().sum();
            double loss = 0.0;
            for (int i = 0; i < cfg.batch_size; ++i)
                loss += std::log(row_sum[i]) + row_max[i] - logits(i, y[static_cast<std::size_t>(i)]);
            loss /= cfg.batch_size;
            if (!std::isfinite(loss))
                throw TrainDivergenceError("training diverged (non-finite loss) at epoch " +
                                               std::to_string(epoch),
                                           epoch);

            Eigen::MatrixXd d_logits = z.array().colwise() / row_sum.array();
            for (int i = 0; i < cfg.batch_size; ++i)
                d_logits(i, y[static_cast<std::size_t>(i)]) -= 1.0;
            d_logits /= static_cast<double>(cfg.batch_size);

            const std::vector<Eigen::MatrixXd> grads =
                topo ? topo_backward(result.params, plan, X, topo_trace, d_logits)
                     : chain_backward(w, flags, chain_trace, d_logits);

            const double lr =
                0.5 * cfg.learning_rate *
                (1.0 + std::cos(M_PI * static_cast<double>(step) /
                                static_cast<double>(total_steps)));
            for (std::size_t i = 0; i < w.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] + grads[i];
                w[i] -= lr * velocity[i];
            }
            ++step;
        }
        result.curve.per_epoch.push_back(test_accuracy(result.params, data.test));
        if (keep_checkpoints) result.checkpoints.push_back(w);
    }
    return result;
}

}  // namespace archemb
