#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "archemb/space.hpp"

namespace archemb {

struct BenchRecord {
    Genotype genotype;
    std::uint64_t seed = 0;  // training seed
    std::vector<double> curve;
    double final_accuracy = 0.0;
};

/// Persisted map (genotype, train seed) -> accuracy curve; the oracle that
/// search methods query instead of training networks.
class TabularBenchmark {
  public:
    void insert(BenchRecord record);
    bool has(const Genotype& g, std::uint64_t seed) const;
    const BenchRecord& at(const Genotype& g, std::uint64_t seed) const;
    double final_accuracy(const Genotype& g, std::uint64_t seed) const;
    std::size_t size() const { return records_.size(); }

    const std::map<std::pair<std::string, std::uint64_t>, BenchRecord>& records() const {
        return records_;
    }

    /// JSON-lines, one record per (genotype, seed), preceded by `#` comment
    /// lines. Writing is ordered by key so identical content is byte-identical.
    void save(const std::filesystem::path& path, const std::string& header_comment) const;
    static TabularBenchmark load(const std::filesystem::path& path);

  private:
    std::map<std::pair<std::string, std::uint64_t>, BenchRecord> records_;
};

}  // namespace archemb
