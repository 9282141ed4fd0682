#include "archemb/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "archemb/analysis.hpp"
#include "archemb/errors.hpp"
#include "archemb/jacobian.hpp"
#include "archemb/matrix_io.hpp"
#include "archemb/parallel.hpp"
#include "archemb/rng.hpp"
#include "archemb/stats.hpp"
#include "archemb/surrogate.hpp"

namespace archemb::pipeline {

namespace {

namespace fs = std::filesystem;

OutputReduce reduce_of(const ExperimentConfig& cfg) {
    return cfg.output_reduce == "sum" ? OutputReduce::Sum : OutputReduce::L1;
}

std::string fmt(const char* format, double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), format, v);
    return buffer;
}

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw MissingArtifactError(path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path.string());
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

/// Genotypes excluded by compute-epdjm (zero principal singular value).
static std::set<std::string> load_degenerate_set(const fs::path& dir) {
    std::set<std::string> out;
    if (!fs::exists(dir / "degenerate.txt")) return out;
    auto in = open_in(dir / "degenerate.txt");
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.insert(line);
    return out;
}

std::vector<SearchSpaceSpec> spaces_of(const ExperimentConfig& cfg) {
    if (cfg.space == "topology") return {SearchSpaceSpec::topology()};
    if (cfg.space == "size") return {SearchSpaceSpec::size()};
    return {SearchSpaceSpec::topology(), SearchSpaceSpec::size()};
}

std::string space_tag(const SearchSpaceSpec& space) {
    return space.family == Family::Topology ? "topology" : "size";
}

fs::path bench_path(const ExperimentConfig& cfg, const SearchSpaceSpec& space) {
    return fs::path(cfg.out_dir) / ("bench_" + space_tag(space) + ".jsonl");
}

fs::path views_dir(const ExperimentConfig& cfg, const SearchSpaceSpec& space) {
    return fs::path(cfg.out_dir) / ("views_" + space_tag(space));
}

fs::path encoder_dir(const ExperimentConfig& cfg) { return fs::path(cfg.out_dir) / "encoder"; }

fs::path embeddings_path(const ExperimentConfig& cfg, const SearchSpaceSpec& space) {
    return fs::path(cfg.out_dir) / ("embeddings_" + space_tag(space) + ".csv");
}

DatasetPair experiment_dataset() { return gen_dataset(kDatasetSeed, kTrainSize, kTestSize); }

ProbeSet experiment_probes(const ExperimentConfig& cfg) {
    const DatasetPair data = experiment_dataset();
    return make_probe_set(data.train, cfg.probe_count, cfg.probe_seed);
}

// ---------------------------------------------------------------------------
// gen-bench
// ---------------------------------------------------------------------------

void gen_bench(const ExperimentConfig& cfg, int jobs) {
    fs::create_directories(cfg.out_dir);
    write_resolved_config(cfg, fs::path(cfg.out_dir) / "config.resolved");
    const DatasetPair data = experiment_dataset();
    const std::string header = "config " + config_hash_hex(cfg);

    for (const SearchSpaceSpec& space : spaces_of(cfg)) {
        const fs::path path = bench_path(cfg, space);
        TabularBenchmark bench;
        if (fs::exists(path)) bench = TabularBenchmark::load(path);

        struct Task {
            Genotype genotype;
            std::uint64_t seed;
        };
        std::vector<Task> missing;
        for (const Genotype& g : enumerate(space))
            for (int s = 0; s < cfg.bench_seeds; ++s)
                if (!bench.has(g, static_cast<std::uint64_t>(s)))
                    missing.push_back({g, static_cast<std::uint64_t>(s)});
        if (missing.empty()) {
            std::printf("gen-bench %s: complete (%zu records)\n", space_tag(space).c_str(),
                        bench.size());
            continue;
        }

        std::vector<BenchRecord> results(missing.size());
        parallel_for(missing.size(), jobs, [&](std::size_t i) {
            const Task& task = missing[i];
            TrainConfig train_cfg;
            train_cfg.epochs = cfg.train_epochs;
            train_cfg.seed = task.seed;
            const NetworkParams net = instantiate(space, task.genotype, task.seed);
            const TrainResult trained = train(net, data, train_cfg);
            results[i] = {task.genotype, task.seed, trained.curve.per_epoch,
                          trained.curve.final_test_accuracy()};
        });
        for (BenchRecord& record : results) bench.insert(std::move(record));
        bench.save(path, header);
        std::printf("gen-bench %s: trained %zu, total %zu records\n", space_tag(space).c_str(),
                    missing.size(), bench.size());
    }
}

// ---------------------------------------------------------------------------
// compute-epdjm
// ---------------------------------------------------------------------------

void compute_epdjm(const ExperimentConfig& cfg, int jobs) {
    fs::create_directories(cfg.out_dir);
    write_resolved_config(cfg, fs::path(cfg.out_dir) / "config.resolved");
    const ProbeSet probes = experiment_probes(cfg);

    for (const SearchSpaceSpec& space : spaces_of(cfg)) {
        const ViewStore store = precompute_views(space, probes, cfg.k, cfg.n_views,
                                                 cfg.normalized, reduce_of(cfg), jobs);
        const fs::path dir = views_dir(cfg, space);
        fs::create_directories(dir);

        for (std::size_t gi = 0; gi < store.genotypes.size(); ++gi) {
            for (int v = 0; v < store.n_views; ++v) {
                const Epdjm& e = store.views[gi][static_cast<std::size_t>(v)];
                save_matrix(dir / (format_genotype(store.genotypes[gi]) + "_" +
                                   std::to_string(v) + ".epdj"),
                            e.rows, e.normalized);
            }
        }
        {
            auto manifest = open_out(dir / "manifest.txt");
            manifest << "# config " << config_hash_hex(cfg) << "\n";
            manifest << "space=" << space_tag(space) << "\n";
            manifest << "probe_seed=" << probes.seed << "\n";
            manifest << "probe_count=" << probes.probes.rows() << "\n";
            manifest << "k=" << store.k << "\n";
            manifest << "n_views=" << store.n_views << "\n";
            manifest << "normalized=" << (store.normalized ? "true" : "false") << "\n";
            manifest << "output_reduce=" << cfg.output_reduce << "\n";
            manifest << "genotypes=" << store.genotypes.size() << "\n";
        }
        if (!store.degenerate.empty()) {
            auto warn = open_out(dir / "degenerate.txt");
            for (const Genotype& g : store.degenerate) warn << format_genotype(g) << "\n";
        }
        std::printf("compute-epdjm %s: %zu genotypes x %d views (%zu degenerate)\n",
                    space_tag(space).c_str(), store.genotypes.size(), store.n_views,
                    store.degenerate.size());
    }
}

ViewStore load_view_store(const ExperimentConfig& cfg, const SearchSpaceSpec& space) {
    const fs::path dir = views_dir(cfg, space);
    if (!fs::exists(dir / "manifest.txt")) throw MissingArtifactError((dir / "manifest.txt").string());

    std::vector<Genotype> degenerate;
    if (fs::exists(dir / "degenerate.txt")) {
        auto in = open_in(dir / "degenerate.txt");
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) degenerate.push_back(parse_genotype(line));
    }

    ViewStore store;
    store.probe_seed = cfg.probe_seed;
    store.k = cfg.k;
    store.n_views = cfg.n_views;
    store.normalized = cfg.normalized;
    store.reduce = reduce_of(cfg);
    store.degenerate = degenerate;
    for (const Genotype& g : enumerate(space)) {
        if (std::find(degenerate.begin(), degenerate.end(), g) != degenerate.end()) continue;
        std::vector<Epdjm> views;
        for (int v = 0; v < cfg.n_views; ++v) {
            const fs::path file =
                dir / (format_genotype(g) + "_" + std::to_string(v) + ".epdj");
            Epdjm e;
            bool normalized = false;
            e.rows = load_matrix(file, &normalized);
            e.normalized = normalized;
            e.genotype = g;
            e.init_seed = static_cast<std::uint64_t>(v);
            e.probe_seed = cfg.probe_seed;
            e.reduce = reduce_of(cfg);
            views.push_back(std::move(e));
        }
        store.genotypes.push_back(g);
        store.views.push_back(std::move(views));
    }
    return store;
}

// ---------------------------------------------------------------------------
// train-encoder
// ---------------------------------------------------------------------------

void save_encoder(const EncoderParams& enc, const fs::path& dir,
                  const std::string& header_comment) {
    fs::create_directories(dir);
    const std::pair<const char*, const Eigen::MatrixXd*> parts[] = {
        {"phi1", &enc.phi1}, {"phi2", &enc.phi2}, {"rho1", &enc.rho1},
        {"rho2", &enc.rho2}, {"head", &enc.head}};
    auto manifest = open_out(dir / "manifest.txt");
    manifest << "# " << header_comment << "\n";
    for (const auto& [name, matrix] : parts) {
        save_matrix(dir / (std::string(name) + ".epdj"), *matrix);
        manifest << name << "=" << matrix->rows() << "x" << matrix->cols() << "\n";
    }
    manifest << "init_seed=" << enc.init_seed << "\n";
}

EncoderParams load_encoder(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.txt"))
        throw MissingArtifactError((dir / "manifest.txt").string());
    EncoderParams enc;
    enc.phi1 = load_matrix(dir / "phi1.epdj");
    enc.phi2 = load_matrix(dir / "phi2.epdj");
    enc.rho1 = load_matrix(dir / "rho1.epdj");
    enc.rho2 = load_matrix(dir / "rho2.epdj");
    enc.head = load_matrix(dir / "head.epdj");
    return enc;
}

namespace {

ContrastiveConfig contrastive_config(const ExperimentConfig& cfg) {
    ContrastiveConfig out;
    out.temperature = cfg.temperature;
    out.batch_size = cfg.batch_size;
    out.n_views = cfg.n_views;
    out.steps = cfg.encoder_steps;
    out.seed = cfg.encoder_seed;
    out.k = cfg.k;
    out.d_embed = cfg.d_embed;
    out.d_proj = cfg.d_proj;
    return out;
}

ViewStore load_store_per_config(const ExperimentConfig& cfg) {
    const auto spaces = spaces_of(cfg);
    ViewStore store = load_view_store(cfg, spaces[0]);
    for (std::size_t i = 1; i < spaces.size(); ++i)
        store = merge_stores(store, load_view_store(cfg, spaces[i]));
    return store;
}

}  // namespace

void train_encoder_cmd(const ExperimentConfig& cfg, int jobs) {
    const ViewStore store = load_store_per_config(cfg);
    const TrainedEncoder trained = train_encoder(store, contrastive_config(cfg), jobs);
    save_encoder(trained.params, encoder_dir(cfg), "config " + config_hash_hex(cfg));

    auto trace = open_out(encoder_dir(cfg) / "loss_trace.csv");
    trace << "# config " << config_hash_hex(cfg) << "\n";
    trace << "step,loss\n";
    for (std::size_t i = 0; i < trained.loss_trace.size(); ++i)
        trace << i << "," << fmt("%.9g", trained.loss_trace[i]) << "\n";
    std::printf("train-encoder: %d steps on %zu genotypes\n", cfg.encoder_steps,
                store.genotypes.size());
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

void embed_cmd(const ExperimentConfig& cfg, int jobs) {
    const EncoderParams enc = load_encoder(encoder_dir(cfg));
    for (const SearchSpaceSpec& space : spaces_of(cfg)) {
        const ViewStore store = load_view_store(cfg, space);
        std::vector<std::vector<Eigen::VectorXd>> embeddings(store.genotypes.size());
        parallel_for(store.genotypes.size(), jobs, [&](std::size_t gi) {
            for (const Epdjm& view : store.views[gi])
                embeddings[gi].push_back(encode(enc, view));
        });

        auto out = open_out(embeddings_path(cfg, space));
        out << "# config " << config_hash_hex(cfg) << "\n";
        out << "genotype,seed";
        for (int c = 0; c < cfg.d_embed; ++c) out << ",e" << c;
        out << "\n";
        for (std::size_t gi = 0; gi < store.genotypes.size(); ++gi) {
            for (int v = 0; v < store.n_views; ++v) {
                out << format_genotype(store.genotypes[gi]) << "," << v;
                const Eigen::VectorXd& e = embeddings[gi][static_cast<std::size_t>(v)];
                for (Eigen::Index c = 0; c < e.size(); ++c) out << "," << fmt("%.17g", e[c]);
                out << "\n";
            }
        }
        std::printf("embed %s: %zu rows\n", space_tag(space).c_str(),
                    store.genotypes.size() * static_cast<std::size_t>(store.n_views));
    }
}

std::map<std::string, std::vector<Eigen::VectorXd>> load_embeddings_csv(const fs::path& path) {
    auto in = open_in(path);
    std::map<std::string, std::vector<Eigen::VectorXd>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("genotype,", 0) == 0) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 3) throw NumericError("bad embeddings row: " + line);
        Eigen::VectorXd e(static_cast<Eigen::Index>(fields.size() - 2));
        for (std::size_t c = 2; c < fields.size(); ++c)
            e[static_cast<Eigen::Index>(c - 2)] = std::stod(fields[c]);
        out[fields[0]].push_back(std::move(e));
    }
    return out;
}

Eigen::VectorXd mean_embedding(const std::vector<Eigen::VectorXd>& views) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(views.at(0).size());
    for (const auto& v : views) mean += v;
    return mean / static_cast<double>(views.size());
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

namespace {

SearchProblem build_problem(const ExperimentConfig& cfg, const SearchSpaceSpec& space,
                            bool with_embeddings) {
    SearchProblem problem;
    problem.space = space;
    const TabularBenchmark bench = TabularBenchmark::load(bench_path(cfg, space));
    for (const Genotype& g : enumerate(space))
        problem.accuracy.push_back(bench.final_accuracy(g, 0));

    if (with_embeddings) {
        const auto views = load_embeddings_csv(embeddings_path(cfg, space));
        const auto degenerate = load_degenerate_set(views_dir(cfg, space));
        for (const Genotype& g : enumerate(space)) {
            const auto it = views.find(format_genotype(g));
            if (it != views.end()) {
                problem.embeddings.push_back(mean_embedding(it->second));
            } else if (degenerate.count(format_genotype(g))) {
                // a zero EPDJM encodes to the zero vector, so degenerate
                // architectures keep a well-defined place in the GP input
                problem.embeddings.push_back(Eigen::VectorXd::Zero(cfg.d_embed));
            } else {
                throw MissingArtifactError("embedding for " + format_genotype(g));
            }
        }
    }
    return problem;
}

void write_search_log(const fs::path& path, const SearchLog& log, const std::string& hash) {
    auto out = open_out(path);
    out << "# config " << hash << "\n";
    out << "step,genotype,accuracy,best_so_far\n";
    for (const SearchStep& s : log.steps)
        out << s.step << "," << format_genotype(s.genotype) << "," << fmt("%.6f", s.accuracy)
            << "," << fmt("%.6f", s.best_so_far) << "\n";
}

}  // namespace

void search_cmd(const ExperimentConfig& cfg, int jobs) {
    const std::string hash = config_hash_hex(cfg);
    const SearchSpaceSpec space = spaces_of(cfg)[0];
    const SearchProblem problem = build_problem(cfg, space, true);
    SearchProblem baseline = problem;  // identical accuracy table for every method
    baseline.embeddings.clear();

    const fs::path dir = fs::path(cfg.out_dir) / "search";
    fs::create_directories(dir);

    struct Run {
        std::string method;
        std::uint64_t seed;
    };
    std::vector<Run> runs;
    for (int s = 0; s < cfg.search_seeds; ++s) {
        runs.push_back({"smbo", static_cast<std::uint64_t>(s)});
        runs.push_back({"random", static_cast<std::uint64_t>(s)});
        runs.push_back({"evolution", static_cast<std::uint64_t>(s)});
    }
    std::vector<SearchLog> logs(runs.size());
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        if (runs[i].method == "smbo")
            logs[i] = smbo_search(problem, cfg.search_budget, 20, 5, runs[i].seed);
        else if (runs[i].method == "random")
            logs[i] = random_search(baseline, cfg.search_budget, runs[i].seed);
        else
            logs[i] = aging_evolution(baseline,
                                      std::max(cfg.search_budget, 20), 20, 10, runs[i].seed);
    });
    for (std::size_t i = 0; i < runs.size(); ++i)
        write_search_log(dir / (runs[i].method + "_" + std::to_string(runs[i].seed) + ".csv"),
                         logs[i], hash);
    std::printf("search %s: %zu runs x budget %d\n", space_tag(space).c_str(), runs.size(),
                cfg.search_budget);
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

void predict_cmd(const ExperimentConfig& cfg, int jobs) {
    (void)jobs;
    const std::string hash = config_hash_hex(cfg);
    const SearchSpaceSpec space = spaces_of(cfg)[0];
    const SearchProblem problem = build_problem(cfg, space, true);
    const auto genotypes = enumerate(space);

    std::vector<Eigen::VectorXd> onehot, random_null;
    Rng rng(derive_seed("predict.null", 0));
    for (const Genotype& g : genotypes) {
        onehot.push_back(encode_onehot(space, g));
        Eigen::VectorXd r(cfg.d_embed);
        for (int c = 0; c < cfg.d_embed; ++c) r[c] = rng.normal();
        random_null.push_back(std::move(r));
    }

    auto out = open_out(fs::path(cfg.out_dir) / "predict.csv");
    out << "# config " << hash << "\n";
    out << "kind,seed,pearson,kendall_tau\n";
    const struct {
        const char* kind;
        const std::vector<Eigen::VectorXd>* embeddings;
    } kinds[] = {{"contrastive", &problem.embeddings},
                 {"onehot", &onehot},
                 {"random", &random_null}};
    for (const auto& [kind, embeddings] : kinds) {
        std::vector<double> pearsons, kendalls;
        for (int seed = 0; seed < 10; ++seed) {
            const PredictivePower power = predictive_power(
                *embeddings, problem.accuracy, 100, static_cast<std::uint64_t>(seed));
            out << kind << "," << seed << "," << fmt("%.6f", power.pearson) << ","
                << fmt("%.6f", power.kendall_tau) << "\n";
            pearsons.push_back(power.pearson);
            kendalls.push_back(power.kendall_tau);
        }
        out << kind << ",mean," << fmt("%.6f", mean_of(pearsons)) << ","
            << fmt("%.6f", mean_of(kendalls)) << "\n";
        out << kind << ",std," << fmt("%.6f", stddev_of(pearsons)) << ","
            << fmt("%.6f", stddev_of(kendalls)) << "\n";
    }
    std::printf("predict %s: wrote predict.csv\n", space_tag(space).c_str());
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

namespace {

std::string direction_tag(Family source, Family target) {
    auto tag = [](Family f) { return f == Family::Topology ? std::string("topology") : "size"; };
    return tag(source) + "->" + tag(target);
}

SpaceData space_data(const ExperimentConfig& cfg, const SearchSpaceSpec& space) {
    SpaceData data;
    data.family = space.family;
    const TabularBenchmark bench = TabularBenchmark::load(bench_path(cfg, space));
    const auto views = load_embeddings_csv(embeddings_path(cfg, space));
    const auto degenerate = load_degenerate_set(views_dir(cfg, space));
    for (const Genotype& g : enumerate(space)) {
        const auto it = views.find(format_genotype(g));
        if (it == views.end()) {
            if (degenerate.count(format_genotype(g))) continue;  // excluded upstream
            throw MissingArtifactError("embedding for " + format_genotype(g));
        }
        data.embeddings.push_back(mean_embedding(it->second));
        data.accuracies.push_back(bench.final_accuracy(g, 0));
    }
    return data;
}

}  // namespace

void transfer_cmd(const ExperimentConfig& cfg, int jobs) {
    (void)jobs;
    if (cfg.space != "both")
        throw ConfigError("transfer requires space=both (shared encoder over the union)");
    if (!cfg.normalized)
        throw ConfigError("transfer requires normalized=true view stores");

    const SpaceData topo = space_data(cfg, SearchSpaceSpec::topology());
    const SpaceData size = space_data(cfg, SearchSpaceSpec::size());
    const TransferReport report = transfer_experiment(size, topo, 10);

    auto out = open_out(fs::path(cfg.out_dir) / "transfer.csv");
    out << "# config " << config_hash_hex(cfg) << "\n";
    out << "direction,seed,pearson,kendall_tau\n";
    for (const TransferRow& row : report.rows)
        out << direction_tag(row.source, row.target) << "," << row.seed << ","
            << fmt("%.6f", row.pearson) << "," << fmt("%.6f", row.kendall_tau) << "\n";
    for (const TransferAggregate& agg : report.aggregates) {
        out << direction_tag(agg.source, agg.target) << ",mean," << fmt("%.6f", agg.pearson_mean)
            << "," << fmt("%.6f", agg.kendall_mean) << "\n";
        out << direction_tag(agg.source, agg.target) << ",std," << fmt("%.6f", agg.pearson_std)
            << "," << fmt("%.6f", agg.kendall_std) << "\n";
    }
    std::printf("transfer: wrote transfer.csv\n");
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

void trace_cmd(const ExperimentConfig& cfg, int jobs) {
    const EncoderParams enc = load_encoder(encoder_dir(cfg));
    const DatasetPair data = experiment_dataset();
    const ProbeSet probes = experiment_probes(cfg);

    auto out = open_out(fs::path(cfg.out_dir) / "trace.csv");
    out << "# config " << config_hash_hex(cfg) << "\n";
    out << "genotype,epoch,x,y,accuracy\n";

    for (const SearchSpaceSpec& space : spaces_of(cfg)) {
        const TabularBenchmark bench = TabularBenchmark::load(bench_path(cfg, space));
        const auto degenerate = load_degenerate_set(views_dir(cfg, space));
        std::vector<Genotype> all;
        for (const Genotype& g : enumerate(space))
            if (!degenerate.count(format_genotype(g))) all.push_back(g);
        const std::size_t count =
            std::min<std::size_t>(static_cast<std::size_t>(kTraceArchitectures), all.size());
        Rng rng(derive_seed("trace.sample", cfg.probe_seed));
        const auto picks = rng.sample_without_replacement(all.size(), count);

        const fs::path ckpt_dir = fs::path(cfg.out_dir) / ("checkpoints_" + space_tag(space));
        fs::create_directories(ckpt_dir);
        std::vector<std::vector<Eigen::VectorXd>> traces(count);
        std::vector<double> finals(count);
        parallel_for(count, jobs, [&](std::size_t i) {
            const Genotype& g = all[picks[i]];
            TrainConfig train_cfg;
            train_cfg.epochs = cfg.train_epochs;
            train_cfg.seed = 0;
            const NetworkParams net = instantiate(space, g, 0);
            const TrainResult result = train(net, data, train_cfg, /*keep_checkpoints=*/true);
            for (std::size_t epoch = 0; epoch < result.checkpoints.size(); ++epoch) {
                char name[64];
                std::snprintf(name, sizeof(name), "%s_e%03zu.ckpt",
                              format_genotype(g).c_str(), epoch);
                save_matrices(ckpt_dir / name, result.checkpoints[epoch]);
            }
            traces[i] = evolution_trace(enc, net, result.checkpoints, probes, cfg.k,
                                        cfg.normalized, reduce_of(cfg));
            finals[i] = bench.final_accuracy(g, 0);
        });

        std::vector<Eigen::VectorXd> flat;
        for (const auto& trace : traces)
            for (const auto& e : trace) flat.push_back(e);
        const Eigen::MatrixXd coords = pca2d(flat);

        std::size_t row = 0;
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t epoch = 0; epoch < traces[i].size(); ++epoch, ++row) {
                out << format_genotype(all[picks[i]]) << "," << epoch << ","
                    << fmt("%.9g", coords(static_cast<Eigen::Index>(row), 0)) << ","
                    << fmt("%.9g", coords(static_cast<Eigen::Index>(row), 1)) << ","
                    << fmt("%.6f", finals[i]) << "\n";
            }
        }
        std::printf("trace %s: %zu architectures x %zu checkpoints\n", space_tag(space).c_str(),
                    count, traces.empty() ? 0 : traces[0].size());
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

void report_cmd(const ExperimentConfig& cfg, int jobs) {
    (void)jobs;
    const fs::path dir = fs::path(cfg.out_dir) / "search";
    if (!fs::exists(dir)) throw MissingArtifactError(dir.string());

    // method -> step -> best-so-far samples over seeds
    std::map<std::string, std::vector<std::vector<double>>> curves;
    for (const char* method : {"smbo", "random", "evolution"}) {
        for (int seed = 0;; ++seed) {
            const fs::path file = dir / (std::string(method) + "_" + std::to_string(seed) + ".csv");
            if (!fs::exists(file)) break;
            auto in = open_in(file);
            std::string line;
            std::vector<double> best;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
                const auto fields = split_csv_line(line);
                best.push_back(std::stod(fields.at(3)));
            }
            auto& per_step = curves[method];
            if (per_step.size() < best.size()) per_step.resize(best.size());
            for (std::size_t s = 0; s < best.size(); ++s) per_step[s].push_back(best[s]);
        }
    }
    if (curves.empty()) throw MissingArtifactError((dir / "smbo_0.csv").string());

    auto out = open_out(fs::path(cfg.out_dir) / "report_search.csv");
    out << "# config " << config_hash_hex(cfg) << "\n";
    out << "step,method,mean_best,std_best\n";
    for (const auto& [method, per_step] : curves) {
        for (std::size_t s = 0; s < per_step.size(); ++s)
            out << s << "," << method << "," << fmt("%.6f", mean_of(per_step[s])) << ","
                << fmt("%.6f", stddev_of(per_step[s])) << "\n";
    }
    std::printf("report: aggregated %zu methods\n", curves.size());
}

}  // namespace archemb::pipeline
