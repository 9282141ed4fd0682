#include "archemb/benchmark.hpp"

#include <fstream>

#include <json.hpp>

#include "archemb/errors.hpp"

namespace archemb {

void TabularBenchmark::insert(BenchRecord record) {
    auto key = std::make_pair(format_genotype(record.genotype), record.seed);
    records_[std::move(key)] = std::move(record);
}

bool TabularBenchmark::has(const Genotype& g, std::uint64_t seed) const {
    return records_.count({format_genotype(g), seed}) > 0;
}

const BenchRecord& TabularBenchmark::at(const Genotype& g, std::uint64_t seed) const {
    const auto it = records_.find({format_genotype(g), seed});
    if (it == records_.end())
        throw MissingArtifactError("benchmark record " + format_genotype(g) + " seed " +
                                   std::to_string(seed));
    return it->second;
}

double TabularBenchmark::final_accuracy(const Genotype& g, std::uint64_t seed) const {
    return at(g, seed).final_accuracy;
}

void TabularBenchmark::save(const std::filesystem::path& path,
                            const std::string& header_comment) const {
    std::ofstream out(path);
    if (!out) throw MissingArtifactError(path.string());
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    for (const auto& [key, record] : records_) {
        nlohmann::json j;
        j["genotype"] = key.first;
        j["seed"] = record.seed;
        j["curve"] = record.curve;
        j["final"] = record.final_accuracy;
        out << j.dump() << "\n";
    }
}

TabularBenchmark TabularBenchmark::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(path.string());
    TabularBenchmark bench;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        BenchRecord record;
        record.genotype = parse_genotype(j.at("genotype").get<std::string>());
        record.seed = j.at("seed").get<std::uint64_t>();
        record.curve = j.at("curve").get<std::vector<double>>();
        record.final_accuracy = j.at("final").get<double>();
        bench.insert(std::move(record));
    }
    return bench;
}

}  // namespace archemb
