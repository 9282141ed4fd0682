#include "archemb/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    const auto end = s.find_last_not_of(" \t\r");
    return begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("config key " + key + ": bad integer '" + value + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("config key " + key + ": bad unsigned integer '" + value + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad number '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config key " + key + ": expected true or false, got '" + value + "'");
}

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%g", v);
    return buffer;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.space != "topology" && cfg.space != "size" && cfg.space != "both")
        throw ConfigError("config: space must be topology, size or both");
    if (cfg.output_reduce != "l1" && cfg.output_reduce != "sum")
        throw ConfigError("config: output_reduce must be l1 or sum");
    if (cfg.probe_count < 1) throw ConfigError("config: probe_count must be >= 1");
    if (cfg.k < 1) throw ConfigError("config: k must be >= 1");
    if (cfg.n_views < 1) throw ConfigError("config: n_views must be >= 1");
    if (cfg.temperature <= 0.0) throw ConfigError("config: temperature must be > 0");
    if (cfg.batch_size < 2) throw ConfigError("config: batch_size must be >= 2");
    if (cfg.d_embed < 1 || cfg.d_proj < 1) throw ConfigError("config: embedding dims must be >= 1");
    if (cfg.encoder_steps < 0) throw ConfigError("config: encoder_steps must be >= 0");
    if (cfg.train_epochs < 1) throw ConfigError("config: train_epochs must be >= 1");
    if (cfg.bench_seeds < 1) throw ConfigError("config: bench_seeds must be >= 1");
    if (cfg.search_budget < 1) throw ConfigError("config: search_budget must be >= 1");
    if (cfg.search_seeds < 1) throw ConfigError("config: search_seeds must be >= 1");
    if (cfg.out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "space") cfg.space = value;
        else if (key == "probe_count") cfg.probe_count = parse_int(key, value);
        else if (key == "probe_seed") cfg.probe_seed = parse_u64(key, value);
        else if (key == "k") cfg.k = parse_int(key, value);
        else if (key == "normalized") cfg.normalized = parse_bool(key, value);
        else if (key == "output_reduce") cfg.output_reduce = value;
        else if (key == "n_views") cfg.n_views = parse_int(key, value);
        else if (key == "temperature") cfg.temperature = parse_double(key, value);
        else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
        else if (key == "d_embed") cfg.d_embed = parse_int(key, value);
        else if (key == "d_proj") cfg.d_proj = parse_int(key, value);
        else if (key == "encoder_steps") cfg.encoder_steps = parse_int(key, value);
        else if (key == "encoder_seed") cfg.encoder_seed = parse_u64(key, value);
        else if (key == "train_epochs") cfg.train_epochs = parse_int(key, value);
        else if (key == "bench_seeds") cfg.bench_seeds = parse_int(key, value);
        else if (key == "search_budget") cfg.search_budget = parse_int(key, value);
        else if (key == "search_seeds") cfg.search_seeds = parse_int(key, value);
        else if (key == "out_dir") cfg.out_dir = value;
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string resolved_config_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "space=" << cfg.space << "\n";
    out << "probe_count=" << cfg.probe_count << "\n";
    out << "probe_seed=" << cfg.probe_seed << "\n";
    out << "k=" << cfg.k << "\n";
    out << "normalized=" << (cfg.normalized ? "true" : "false") << "\n";
    out << "output_reduce=" << cfg.output_reduce << "\n";
    out << "n_views=" << cfg.n_views << "\n";
    out << "temperature=" << format_double(cfg.temperature) << "\n";
    out << "batch_size=" << cfg.batch_size << "\n";
    out << "d_embed=" << cfg.d_embed << "\n";
    out << "d_proj=" << cfg.d_proj << "\n";
    out << "encoder_steps=" << cfg.encoder_steps << "\n";
    out << "encoder_seed=" << cfg.encoder_seed << "\n";
    out << "train_epochs=" << cfg.train_epochs << "\n";
    out << "bench_seeds=" << cfg.bench_seeds << "\n";
    out << "search_budget=" << cfg.search_budget << "\n";
    out << "search_seeds=" << cfg.search_seeds << "\n";
    out << "out_dir=" << cfg.out_dir << "\n";
    return out.str();
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a64(resolved_config_text(cfg));
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

void write_resolved_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MissingArtifactError(path.string());
    out << "# config " << config_hash_hex(cfg) << "\n" << resolved_config_text(cfg);
}

}  // namespace archemb
