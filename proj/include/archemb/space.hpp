#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace archemb {

enum class Family { Topology, Size };

enum class EdgeOp : std::uint8_t { Zero = 0, Identity = 1, LinearReLU = 2 };

/// One of the two enumerable search-space families, plus enough knobs to
/// build tiny debug variants in tests. The canonical instances are
/// topology() (4-node / 6-edge cells, 3 ops, 729 genotypes) and
/// size() (5 layers x 3 width choices, 243 genotypes).
struct SearchSpaceSpec {
    Family family = Family::Topology;

    // topology family
    int n_nodes = 4;              // cell DAG nodes; node 0 is the cell input
    std::vector<EdgeOp> edge_ops = {EdgeOp::Zero, EdgeOp::Identity, EdgeOp::LinearReLU};
    int cell_stack_count = 2;
    int fixed_width = 16;

    // size family
    int n_layers = 5;
    std::vector<int> width_choices = {4, 8, 16};

    // shared
    int input_dim = 16;
    int n_classes = 4;

    static SearchSpaceSpec topology();
    static SearchSpaceSpec size();

    /// Number of genes: one per DAG edge (topology) or per layer (size).
    int n_genes() const;
    /// Choices per gene: |edge_ops| or |width_choices|.
    int gene_radix() const;
    /// Edge list in the fixed upper-triangular order (0,1),(0,2),(1,2),(0,3),...
    std::vector<std::pair<int, int>> edges() const;

    std::uint64_t cardinality() const;
};

struct Genotype {
    Family family = Family::Topology;
    std::vector<std::uint8_t> genes;

    bool operator==(const Genotype&) const = default;
    /// Family letter first, then gene digits; coincides with string order
    /// of format() within a family.
    auto operator<=>(const Genotype&) const = default;
};

std::vector<Genotype> enumerate(const SearchSpaceSpec& space);
Genotype genotype_at(const SearchSpaceSpec& space, std::uint64_t index);
std::uint64_t genotype_index(const SearchSpaceSpec& space, const Genotype& g);

Genotype sample_random(const SearchSpaceSpec& space, std::uint64_t seed);

/// Reassigns exactly one uniformly chosen gene to a uniformly chosen
/// different value. Requires gene_radix >= 2.
Genotype mutate(const SearchSpaceSpec& space, const Genotype& g, std::uint64_t seed);

/// Concatenated per-gene one-hot blocks (the traditional baseline encoding).
Eigen::VectorXd encode_onehot(const SearchSpaceSpec& space, const Genotype& g);

/// "T-012012" / "S-01210": family letter, dash, gene digits.
std::string format_genotype(const Genotype& g);

/// Inverse of format_genotype for the two canonical spaces.
/// Throws ConfigError on unknown family letter, wrong length or digit range.
Genotype parse_genotype(const std::string& s);

}  // namespace archemb
