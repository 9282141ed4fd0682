#include "archemb/encoder.hpp"

#include <cmath>

#include "archemb/errors.hpp"
#include "archemb/parallel.hpp"
#include "archemb/rng.hpp"

namespace archemb {

namespace {

Eigen::MatrixXd he_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd w(rows, cols);
    const double scale = std::sqrt(2.0 / static_cast<double>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = scale * rng.normal();
    return w;
}

struct EncodeTrace {
    Eigen::MatrixXd u1, h1;  // phi layer 1 pre/post (m x hidden)
    Eigen::MatrixXd u2, h2;  // phi layer 2
    Eigen::VectorXd mean;    // column mean of h2
    Eigen::VectorXd v1, g1;  // rho layer 1 pre/post
    Eigen::VectorXd emb;     // rho output
    Eigen::VectorXd u_head;  // head output before normalization
    Eigen::VectorXd proj;    // unit projection
};

void encode_forward(const EncoderParams& enc, const Eigen::MatrixXd& rows, EncodeTrace& t) {
    if (rows.cols() != enc.phi1.cols())
        throw ConfigError("EPDJM column count does not match encoder input width");
    t.u1 = rows * enc.phi1.transpose();
    t.h1 = t.u1.cwiseMax(0.0);
    t.u2 = t.h1 * enc.phi2.transpose();
    t.h2 = t.u2.cwiseMax(0.0);
    t.mean = t.h2.colwise().mean();
    t.v1 = enc.rho1 * t.mean;
    t.g1 = t.v1.cwiseMax(0.0);
    t.emb = enc.rho2 * t.g1;
}

void head_forward(const EncoderParams& enc, EncodeTrace& t) {
    t.u_head = enc.head * t.emb;
    const double norm = t.u_head.norm();
    if (norm == 0.0) throw NumericError("projection head received a zero vector");
    t.proj = t.u_head / norm;
}

/// Backward from d(loss)/d(proj) through head and encoder; accumulates into g.
void encode_backward(const EncoderParams& enc, const Eigen::MatrixXd& rows,
                     const EncodeTrace& t, const Eigen::VectorXd& d_proj, EncoderGrads& g) {
    const double norm = t.u_head.norm();
    const Eigen::VectorXd d_head =
        (d_proj - t.proj * t.proj.dot(d_proj)) / norm;  // through L2 normalization
    g.head += d_head * t.emb.transpose();
    const Eigen::VectorXd d_emb = enc.head.transpose() * d_head;

    g.rho2 += d_emb * t.g1.transpose();
    const Eigen::VectorXd d_g1 = enc.rho2.transpose() * d_emb;
    const Eigen::VectorXd d_v1 =
        ((t.v1.array() > 0.0).cast<double>() * d_g1.array()).matrix();
    g.rho1 += d_v1 * t.mean.transpose();
    const Eigen::VectorXd d_mean = enc.rho1.transpose() * d_v1;

    const double m = static_cast<double>(rows.rows());
    const Eigen::MatrixXd d_h2 = (Eigen::VectorXd::Ones(rows.rows()) / m) * d_mean.transpose();
    const Eigen::MatrixXd d_u2 =
        ((t.u2.array() > 0.0).cast<double>() * d_h2.array()).matrix();
    g.phi2 += d_u2.transpose() * t.h1;
    const Eigen::MatrixXd d_h1 = d_u2 * enc.phi2;
    const Eigen::MatrixXd d_u1 =
        ((t.u1.array() > 0.0).cast<double>() * d_h1.array()).matrix();
    g.phi1 += d_u1.transpose() * rows;
}

}  // namespace

EncoderParams init_encoder(const ContrastiveConfig& cfg, std::uint64_t seed) {
    Rng rng(derive_seed("encoder.init", seed));
    EncoderParams p;
    p.init_seed = seed;
    p.phi1 = he_matrix(cfg.hidden, cfg.k, rng);
    p.phi2 = he_matrix(cfg.hidden, cfg.hidden, rng);
    p.rho1 = he_matrix(cfg.hidden, cfg.hidden, rng);
    p.rho2 = he_matrix(cfg.d_embed, cfg.hidden, rng);
    p.head = he_matrix(cfg.d_proj, cfg.d_embed, rng);
    return p;
}

ViewStore precompute_views(const SearchSpaceSpec& space, const ProbeSet& probes, int k,
                           int n_views, bool normalized, OutputReduce reduce, int jobs) {
    if (n_views < 1) throw ConfigError("n_views must be >= 1");
    const std::vector<Genotype> all = enumerate(space);
    std::vector<std::vector<Epdjm>> slots(all.size());
    std::vector<char> bad(all.size(), 0);

    parallel_for(all.size(), jobs, [&](std::size_t gi) {
        std::vector<Epdjm> views;
        views.reserve(static_cast<std::size_t>(n_views));
        for (int v = 0; v < n_views; ++v) {
            const NetworkParams net = instantiate(space, all[gi], static_cast<std::uint64_t>(v));
            const Edjm edjm = assemble_edjm(net, probes, reduce);
            Projection proj = project(edjm, k);
            if (normalized) {
                if (psv_score(proj.factors) <= 0.0) {
                    bad[gi] = 1;
                    return;
                }
                proj.epdjm = normalize_psv(proj.epdjm, proj.factors);
            }
            views.push_back(std::move(proj.epdjm));
        }
        slots[gi] = std::move(views);
    });

    ViewStore store;
    store.probe_seed = probes.seed;
    store.k = k;
    store.n_views = n_views;
    store.normalized = normalized;
    store.reduce = reduce;
    for (std::size_t gi = 0; gi < all.size(); ++gi) {
        if (bad[gi]) {
            store.degenerate.push_back(all[gi]);
        } else {
            store.genotypes.push_back(all[gi]);
            store.views.push_back(std::move(slots[gi]));
        }
    }
    return store;
}

ViewStore merge_stores(const ViewStore& a, const ViewStore& b) {
    if (a.k != b.k || a.n_views != b.n_views || a.normalized != b.normalized ||
        a.probe_seed != b.probe_seed)
        throw ConfigError("cannot merge view stores with different shapes or provenance");
    ViewStore out = a;
    out.genotypes.insert(out.genotypes.end(), b.genotypes.begin(), b.genotypes.end());
    out.views.insert(out.views.end(), b.views.begin(), b.views.end());
    out.degenerate.insert(out.degenerate.end(), b.degenerate.begin(), b.degenerate.end());
    return out;
}

Eigen::VectorXd encode_rows(const EncoderParams& enc, const Eigen::MatrixXd& rows) {
    EncodeTrace t;
    encode_forward(enc, rows, t);
    return t.emb;
}

Eigen::VectorXd encode(const EncoderParams& enc, const Epdjm& e) {
    return encode_rows(enc, e.rows);
}

Eigen::VectorXd project_head(const EncoderParams& enc, const Eigen::VectorXd& emb) {
    const Eigen::VectorXd u = enc.head * emb;
    const double norm = u.norm();
    if (norm == 0.0) throw NumericError("projection head received a zero vector");
    return u / norm;
}

NtXentResult nt_xent(const Eigen::MatrixXd& projections, double temperature) {
    if (temperature <= 0.0) throw ConfigError("temperature must be > 0");
    const Eigen::Index n = projections.rows();
    if (n < 4 || n % 2 != 0)
        throw ConfigError("nt_xent needs an even number of projections with N >= 2 pairs");

    const Eigen::MatrixXd sim = projections * projections.transpose() / temperature;

    NtXentResult out;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);  // dL/d(sim), scaled by 1/2N below
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index positive = i ^ 1;
        double row_max = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) row_max = std::max(row_max, sim(i, j));
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) denom += std::exp(sim(i, j) - row_max);
        out.loss += -(sim(i, positive) - row_max) + std::log(denom);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) g(i, j) = std::exp(sim(i, j) - row_max) / denom;
        g(i, positive) -= 1.0;
    }
    const double scale = 1.0 / static_cast<double>(n);
    out.loss *= scale;
    out.d_projections = (scale / temperature) * ((g + g.transpose()) * projections);
    return out;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& p) {
    EncoderGrads g;
    g.phi1 = Eigen::MatrixXd::Zero(p.phi1.rows(), p.phi1.cols());
    g.phi2 = Eigen::MatrixXd::Zero(p.phi2.rows(), p.phi2.cols());
    g.rho1 = Eigen::MatrixXd::Zero(p.rho1.rows(), p.rho1.cols());
    g.rho2 = Eigen::MatrixXd::Zero(p.rho2.rows(), p.rho2.cols());
    g.head = Eigen::MatrixXd::Zero(p.head.rows(), p.head.cols());
    return g;
}

void EncoderGrads::add(const EncoderGrads& other) {
    phi1 += other.phi1;
    phi2 += other.phi2;
    rho1 += other.rho1;
    rho2 += other.rho2;
    head += other.head;
}

ContrastiveStep contrastive_loss_and_grads(const EncoderParams& enc,
                                           const std::vector<const Eigen::MatrixXd*>& batch,
                                           double temperature, int jobs) {
    const std::size_t n = batch.size();
    std::vector<EncodeTrace> traces(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        encode_forward(enc, *batch[i], traces[i]);
        head_forward(enc, traces[i]);
    });

    Eigen::MatrixXd projections(static_cast<Eigen::Index>(n), enc.head.rows());
    for (std::size_t i = 0; i < n; ++i)
        projections.row(static_cast<Eigen::Index>(i)) = traces[i].proj;

    const NtXentResult loss = nt_xent(projections, temperature);

    // per-item gradient slots summed in index order: bit-reproducible for
    // any worker count
    std::vector<EncoderGrads> slots(n, EncoderGrads::zeros_like(enc));
    parallel_for(n, jobs, [&](std::size_t i) {
        encode_backward(enc, *batch[i], traces[i],
                        loss.d_projections.row(static_cast<Eigen::Index>(i)).transpose(),
                        slots[i]);
    });

    ContrastiveStep step;
    step.loss = loss.loss;
    step.grads = EncoderGrads::zeros_like(enc);
    for (const auto& slot : slots) step.grads.add(slot);
    return step;
}

TrainedEncoder train_encoder(const ViewStore& store, const ContrastiveConfig& cfg, int jobs) {
    if (cfg.batch_size < 2) throw ConfigError("contrastive batch size must be >= 2");
    if (cfg.n_views < 2) throw ConfigError("contrastive training needs >= 2 views");
    if (static_cast<int>(store.genotypes.size()) < cfg.batch_size)
        throw ConfigError("view store covers fewer genotypes than the batch size");
    if (store.n_views < 2) throw ConfigError("view store holds fewer than 2 views");

    TrainedEncoder out;
    out.params = init_encoder(cfg, cfg.seed);
    EncoderParams& p = out.params;

    EncoderGrads m = EncoderGrads::zeros_like(p);
    EncoderGrads v = EncoderGrads::zeros_like(p);
    const std::vector<Eigen::MatrixXd*> m_mats{&m.phi1, &m.phi2, &m.rho1, &m.rho2, &m.head};
    const std::vector<Eigen::MatrixXd*> v_mats{&v.phi1, &v.phi2, &v.rho1, &v.rho2, &v.head};
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    Rng rng(derive_seed("encoder.train", cfg.seed));
    for (int step = 0; step < cfg.steps; ++step) {
        const auto genos = rng.sample_without_replacement(store.genotypes.size(),
                                                          static_cast<std::size_t>(cfg.batch_size));
        std::vector<const Eigen::MatrixXd*> batch;
        batch.reserve(2 * genos.size());
        for (const std::size_t gi : genos) {
            const auto pair =
                rng.sample_without_replacement(static_cast<std::size_t>(store.n_views), 2);
            batch.push_back(&store.views[gi][pair[0]].rows);
            batch.push_back(&store.views[gi][pair[1]].rows);
        }

        const ContrastiveStep result = contrastive_loss_and_grads(p, batch, cfg.temperature, jobs);
        if (!std::isfinite(result.loss))
            throw NumericError("contrastive loss diverged at step " + std::to_string(step));
        out.loss_trace.push_back(result.loss);

        const double t = static_cast<double>(step + 1);
        const double bias1 = 1.0 - std::pow(beta1, t);
        const double bias2 = 1.0 - std::pow(beta2, t);
        const auto params = p.matrices();
        const std::vector<const Eigen::MatrixXd*> grads{
            &result.grads.phi1, &result.grads.phi2, &result.grads.rho1, &result.grads.rho2,
            &result.grads.head};
        for (std::size_t i = 0; i < params.size(); ++i) {
            *m_mats[i] = beta1 * *m_mats[i] + (1.0 - beta1) * *grads[i];
            *v_mats[i] = beta2 * *v_mats[i] + (1.0 - beta2) * grads[i]->cwiseProduct(*grads[i]);
            params[i]->array() -= cfg.learning_rate * (m_mats[i]->array() / bias1) /
                                  ((v_mats[i]->array() / bias2).sqrt() + eps);
        }
    }
    return out;
}

}  // namespace archemb
