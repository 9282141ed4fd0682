#include "archemb/space.hpp"

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

SearchSpaceSpec SearchSpaceSpec::topology() {
    SearchSpaceSpec s;
    s.family = Family::Topology;
    return s;
}

SearchSpaceSpec SearchSpaceSpec::size() {
    SearchSpaceSpec s;
    s.family = Family::Size;
    return s;
}

int SearchSpaceSpec::n_genes() const {
    if (family == Family::Topology) return n_nodes * (n_nodes - 1) / 2;
    return n_layers;
}

int SearchSpaceSpec::gene_radix() const {
    if (family == Family::Topology) return static_cast<int>(edge_ops.size());
    return static_cast<int>(width_choices.size());
}

std::vector<std::pair<int, int>> SearchSpaceSpec::edges() const {
    // (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ... for increasing target node
    std::vector<std::pair<int, int>> e;
    for (int dst = 1; dst < n_nodes; ++dst)
        for (int src = 0; src < dst; ++src) e.emplace_back(src, dst);
    return e;
}

std::uint64_t SearchSpaceSpec::cardinality() const {
    std::uint64_t n = 1;
    for (int i = 0; i < n_genes(); ++i) n *= static_cast<std::uint64_t>(gene_radix());
    return n;
}

Genotype genotype_at(const SearchSpaceSpec& space, std::uint64_t index) {
    const int n = space.n_genes();
    const auto radix = static_cast<std::uint64_t>(space.gene_radix());
    Genotype g;
    g.family = space.family;
    g.genes.assign(static_cast<std::size_t>(n), 0);
    // gene 0 is the most significant digit, so index order = lexicographic order
    for (int i = n - 1; i >= 0; --i) {
        g.genes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index % radix);
        index /= radix;
    }
    return g;
}

std::uint64_t genotype_index(const SearchSpaceSpec& space, const Genotype& g) {
    const auto radix = static_cast<std::uint64_t>(space.gene_radix());
    std::uint64_t idx = 0;
    for (std::uint8_t gene : g.genes) idx = idx * radix + gene;
    return idx;
}

std::vector<Genotype> enumerate(const SearchSpaceSpec& space) {
    const std::uint64_t n = space.cardinality();
    std::vector<Genotype> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(genotype_at(space, i));
    return out;
}

Genotype sample_random(const SearchSpaceSpec& space, std::uint64_t seed) {
    Rng rng(derive_seed("space.sample", seed));
    return genotype_at(space, rng.uniform_index(space.cardinality()));
}

Genotype mutate(const SearchSpaceSpec& space, const Genotype& g, std::uint64_t seed) {
    const int radix = space.gene_radix();
    if (radix < 2) throw ConfigError("mutate requires at least two choices per gene");
    Rng rng(derive_seed("space.mutate", seed));
    Genotype out = g;
    const auto pos = static_cast<std::size_t>(rng.uniform_index(out.genes.size()));
    // uniform over the radix-1 values different from the current one
    const auto shift = 1 + rng.uniform_index(static_cast<std::uint64_t>(radix - 1));
    out.genes[pos] = static_cast<std::uint8_t>((out.genes[pos] + shift) % radix);
    return out;
}

Eigen::VectorXd encode_onehot(const SearchSpaceSpec& space, const Genotype& g) {
    const int radix = space.gene_radix();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.genes.size()) * radix);
    for (std::size_t i = 0; i < g.genes.size(); ++i)
        v[static_cast<Eigen::Index>(i) * radix + g.genes[i]] = 1.0;
    return v;
}

std::string format_genotype(const Genotype& g) {
    std::string s;
    s += (g.family == Family::Topology) ? 'T' : 'S';
    s += '-';
    for (std::uint8_t gene : g.genes) s += static_cast<char>('0' + gene);
    return s;
}

Genotype parse_genotype(const std::string& s) {
    if (s.size() < 3 || s[1] != '-') throw ConfigError("malformed genotype: " + s);
    SearchSpaceSpec space;
    switch (s[0]) {
        case 'T': space = SearchSpaceSpec::topology(); break;
        case 'S': space = SearchSpaceSpec::size(); break;
        default: throw ConfigError("malformed genotype (unknown family): " + s);
    }
    const std::string digits = s.substr(2);
    if (static_cast<int>(digits.size()) != space.n_genes())
        throw ConfigError("malformed genotype (wrong length): " + s);
    Genotype g;
    g.family = space.family;
    for (char c : digits) {
        if (c < '0' || c >= '0' + space.gene_radix())
            throw ConfigError("malformed genotype (digit out of range): " + s);
        g.genes.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return g;
}

}  // namespace archemb
