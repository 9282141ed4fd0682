#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "archemb/errors.hpp"
#include "archemb/space.hpp"

using namespace archemb;

TEST_CASE("enumerate yields the full families in lexicographic order") {
    const auto topo = enumerate(SearchSpaceSpec::topology());
    CHECK(topo.size() == 729);  // 3^6
    const auto size = enumerate(SearchSpaceSpec::size());
    CHECK(size.size() == 243);  // 3^5

    CHECK(std::is_sorted(topo.begin(), topo.end()));
    CHECK(std::adjacent_find(topo.begin(), topo.end()) == topo.end());
    CHECK(std::is_sorted(size.begin(), size.end()));
    CHECK(std::adjacent_find(size.begin(), size.end()) == size.end());

    // a debug space with one edge and one op has a single point
    SearchSpaceSpec debug = SearchSpaceSpec::topology();
    debug.n_nodes = 2;
    debug.edge_ops = {EdgeOp::LinearReLU};
    CHECK(enumerate(debug).size() == 1);
}

TEST_CASE("edge ordering is the fixed upper-triangular pair order") {
    const auto edges = SearchSpaceSpec::topology().edges();
    const std::vector<std::pair<int, int>> expected = {{0, 1}, {0, 2}, {1, 2},
                                                       {0, 3}, {1, 3}, {2, 3}};
    CHECK(edges == expected);
}

TEST_CASE("format and parse round-trip over both full spaces") {
    for (const auto& space : {SearchSpaceSpec::topology(), SearchSpaceSpec::size()}) {
        for (const auto& g : enumerate(space)) {
            CHECK(parse_genotype(format_genotype(g)) == g);
        }
    }
    CHECK(format_genotype(Genotype{Family::Topology, {0, 1, 2, 0, 1, 2}}) == "T-012012");
    const Genotype s = parse_genotype("S-01210");
    CHECK(s.family == Family::Size);
    CHECK(s.genes == std::vector<std::uint8_t>{0, 1, 2, 1, 0});
}

TEST_CASE("parse rejects malformed strings") {
    CHECK_THROWS_AS(parse_genotype("T-9"), ConfigError);
    CHECK_THROWS_AS(parse_genotype("X-000000"), ConfigError);
    CHECK_THROWS_AS(parse_genotype("T-00000"), ConfigError);    // wrong length
    CHECK_THROWS_AS(parse_genotype("T-000003"), ConfigError);   // digit out of range
    CHECK_THROWS_AS(parse_genotype(""), ConfigError);
}

TEST_CASE("sample_random is deterministic and uniform") {
    const auto space = SearchSpaceSpec::topology();
    CHECK(sample_random(space, 42) == sample_random(space, 42));

    // frequency of each of the 729 genotypes within 5 sigma of uniform
    const int draws = 10000;
    std::vector<int> counts(space.cardinality(), 0);
    for (int s = 0; s < draws; ++s)
        ++counts[genotype_index(space, sample_random(space, static_cast<std::uint64_t>(s)))];
    const double p = 1.0 / static_cast<double>(space.cardinality());
    const double mean = draws * p;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    for (int c : counts) CHECK(std::abs(c - mean) <= 5.0 * sigma);

    // consecutive seeds should give distinct genotypes at roughly the
    // collision rate of uniform draws (1/729)
    int distinct = 0;
    for (int s = 0; s < 1000; ++s)
        if (!(sample_random(space, s) == sample_random(space, s + 1))) ++distinct;
    CHECK(distinct >= 980);  // expect ~998.6, generous slack
}

TEST_CASE("mutate changes exactly one gene and stays in the family") {
    const auto space = SearchSpaceSpec::topology();
    const Genotype base{Family::Topology, {0, 0, 0, 0, 0, 0}};
    for (std::uint64_t s = 0; s < 200; ++s) {
        const Genotype m = mutate(space, base, s);
        CHECK(m.family == base.family);
        int diff = 0;
        for (std::size_t i = 0; i < base.genes.size(); ++i)
            if (m.genes[i] != base.genes[i]) ++diff;
        CHECK(diff == 1);
        CHECK(genotype_index(space, m) < space.cardinality());
    }
}

TEST_CASE("repeated mutation reaches every genotype") {
    const auto space = SearchSpaceSpec::topology();
    std::set<std::uint64_t> seen;
    Genotype g{Family::Topology, {0, 0, 0, 0, 0, 0}};
    for (std::uint64_t step = 0; step < 100000 && seen.size() < space.cardinality(); ++step) {
        g = mutate(space, g, step);
        seen.insert(genotype_index(space, g));
    }
    CHECK(seen.size() == space.cardinality());
}

TEST_CASE("one-hot encoding is block-structured and injective") {
    const auto topo = SearchSpaceSpec::topology();
    const auto size = SearchSpaceSpec::size();

    const Eigen::VectorXd v = encode_onehot(topo, Genotype{Family::Topology, {0, 0, 0, 0, 0, 0}});
    CHECK(v.size() == 18);
    for (int block = 0; block < 6; ++block) {
        CHECK(v[3 * block] == 1.0);
        CHECK(v[3 * block + 1] == 0.0);
        CHECK(v[3 * block + 2] == 0.0);
    }
    CHECK(encode_onehot(size, Genotype{Family::Size, {0, 1, 2, 1, 0}}).size() == 15);

    std::set<std::vector<double>> distinct;
    for (const auto& g : enumerate(topo)) {
        const Eigen::VectorXd enc = encode_onehot(topo, g);
        CHECK(enc.sum() == doctest::Approx(static_cast<double>(g.genes.size())));
        distinct.insert(std::vector<double>(enc.data(), enc.data() + enc.size()));
    }
    CHECK(distinct.size() == 729);
}
