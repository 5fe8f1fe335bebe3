#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jc/qstate.hpp"

namespace jc {

// Exact fraction for local multiplicities; float equality is the wrong tool
// for combinatorial counts.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d);

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;

    friend bool operator==(const Rational&, const Rational&) = default;
};

// Points V = {1..N}; blocks stored as bitmasks with position alpha on bit
// (N - alpha), matching the basis-state convention.
struct IncidenceStructure {
    int n_points = 0;
    std::vector<std::uint32_t> blocks;

    IncidenceStructure() = default;
    IncidenceStructure(int n_points_, std::vector<std::uint32_t> blocks_);
    static IncidenceStructure from_position_lists(int n_points,
                                                  const std::vector<std::vector<int>>& blocks);

    bool constant_block_size() const;
    int min_block_size() const;
};

std::uint32_t block_from_positions(const std::vector<int>& positions, int n_points);
std::vector<int> block_positions(std::uint32_t block, int n_points);

struct RegularityResult {
    std::optional<long> lambda; // set when the structure is d-regular
    // two witnesses with differing counts when not regular
    std::optional<std::pair<std::uint32_t, std::uint32_t>> witnesses;
    std::pair<long, long> witness_counts{0, 0};
};

// |B_E| over all E in C(V, d): the constant lambda_d, or a witness pair.
RegularityResult regularity(const IncidenceStructure& structure, int d);

// Permutation of {1..N}, stored as 0-based images.
struct Permutation {
    std::vector<int> images;

    int degree() const { return static_cast<int>(images.size()); }
    static Permutation identity(int degree);
    static Permutation from_cycles(const std::string& cycles, int degree);
    std::string cycle_notation() const;

    int apply(int point) const { return images[static_cast<std::size_t>(point - 1)] + 1; }
    std::uint32_t apply_block(std::uint32_t block, int n_points) const;
    Permutation compose(const Permutation& then) const; // this followed by then

    friend auto operator<=>(const Permutation&, const Permutation&) = default;
};

struct PermGroup {
    int degree = 0;
    std::vector<Permutation> generators;

    PermGroup() = default;
    PermGroup(int degree_, std::vector<Permutation> generators_);
    static PermGroup from_cycle_strings(int degree, const std::vector<std::string>& cycles);
};

// Closure of a block under the group generators, deduplicated and sorted.
std::vector<std::uint32_t> orbit(const PermGroup& group, std::uint32_t seed_block);

std::uint64_t group_order(const PermGroup& group);

// K disjoint families of w-subsets of {1..N}; candidate d-SEED(N, w, K).
struct SeedFamily {
    int n_points = 0;
    int w = 0;
    int d = 0;
    std::vector<std::vector<std::uint32_t>> families;

    std::string to_json() const;
    static SeedFamily from_json(const std::string& text);
};

struct SeedViolation {
    std::uint32_t e = 0; // the offending position set
    int family_i = 0;
    int family_j = 0;
    Rational value_i, value_j;
};

struct SeedCheck {
    bool passed = false;
    std::map<std::uint32_t, Rational> lambda; // E -> lambda(E), |E| <= d
    std::optional<SeedViolation> violation;
};

// Local multiplicity condition |B^(i)_E| / |B^(i)| constant over i for every
// |E| <= d. Families must be disjoint.
SeedCheck verify_seed(const SeedFamily& seed);

// The order-48 group orbit construction of the 3-SEED(8, 4, 3).
SeedFamily construct_833();
PermGroup group_833();

} // namespace jc
