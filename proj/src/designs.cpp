#include "jc/designs.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace jc {

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

IncidenceStructure::IncidenceStructure(int n_points_, std::vector<std::uint32_t> blocks_)
    : n_points(n_points_), blocks(std::move(blocks_)) {
    if (n_points <= 0 || n_points > 24)
        throw std::domain_error("IncidenceStructure: point count must be in 1..24");
    for (std::uint32_t b : blocks)
        if (b >> n_points) throw std::domain_error("IncidenceStructure: block outside point set");
}

IncidenceStructure IncidenceStructure::from_position_lists(
    int n_points, const std::vector<std::vector<int>>& blocks) {
    std::vector<std::uint32_t> masks;
    masks.reserve(blocks.size());
    for (const auto& b : blocks) masks.push_back(block_from_positions(b, n_points));
    return IncidenceStructure(n_points, std::move(masks));
}

bool IncidenceStructure::constant_block_size() const {
    for (std::uint32_t b : blocks)
        if (std::popcount(b) != std::popcount(blocks.front())) return false;
    return true;
}

int IncidenceStructure::min_block_size() const {
    int m = n_points;
    for (std::uint32_t b : blocks) m = std::min(m, std::popcount(b));
    return m;
}

std::uint32_t block_from_positions(const std::vector<int>& positions, int n_points) {
    std::uint32_t mask = 0;
    for (int p : positions) {
        if (p < 1 || p > n_points) throw std::domain_error("block: position out of range");
        const std::uint32_t bit = 1u << (n_points - p);
        if (mask & bit) throw std::domain_error("block: repeated position");
        mask |= bit;
    }
    return mask;
}

std::vector<int> block_positions(std::uint32_t block, int n_points) {
    std::vector<int> out;
    for (int p = 1; p <= n_points; ++p)
        if ((block >> (n_points - p)) & 1u) out.push_back(p);
    return out;
}

namespace {

// enumerate all d-subsets of {1..N} as masks
std::vector<std::uint32_t> subsets_of_size(int n_points, int d) {
    std::vector<std::uint32_t> out;
    const std::uint32_t end = 1u << n_points;
    for (std::uint32_t e = 0; e < end; ++e)
        if (std::popcount(e) == d) out.push_back(e);
    return out;
}

} // namespace

RegularityResult regularity(const IncidenceStructure& structure, int d) {
    if (structure.blocks.empty()) throw std::domain_error("regularity: empty structure");
    if (d < 1 || d > structure.min_block_size())
        throw std::domain_error("regularity: order must be in 1..min block size");
    RegularityResult res;
    bool first = true;
    std::uint32_t first_e = 0;
    long first_count = 0;
    for (std::uint32_t e : subsets_of_size(structure.n_points, d)) {
        long count = 0;
        for (std::uint32_t b : structure.blocks)
            if ((b & e) == e) ++count;
        if (first) {
            first = false;
            first_e = e;
            first_count = count;
        } else if (count != first_count) {
            res.witnesses = {first_e, e};
            res.witness_counts = {first_count, count};
            return res;
        }
    }
    res.lambda = first_count;
    return res;
}

Permutation Permutation::identity(int degree) {
    Permutation p;
    p.images.resize(static_cast<std::size_t>(degree));
    std::iota(p.images.begin(), p.images.end(), 0);
    return p;
}

Permutation Permutation::from_cycles(const std::string& cycles, int degree) {
    Permutation p = identity(degree);
    std::size_t i = 0;
    const std::string& s = cycles;
    auto skip_ws = [&] { while (i < s.size() && (s[i] == ' ' || s[i] == ',' || s[i] == '\t')) ++i; };
    skip_ws();
    while (i < s.size()) {
        if (s[i] != '(') throw std::domain_error("Permutation: expected '(' in cycle notation");
        ++i;
        std::vector<int> cycle;
        for (;;) {
            skip_ws();
            if (i >= s.size()) throw std::domain_error("Permutation: unterminated cycle");
            if (s[i] == ')') {
                ++i;
                break;
            }
            if (!std::isdigit(static_cast<unsigned char>(s[i])))
                throw std::domain_error("Permutation: expected point index in cycle");
            int v = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                v = v * 10 + (s[i++] - '0');
            if (v < 1 || v > degree) throw std::domain_error("Permutation: point out of range");
            if (std::find(cycle.begin(), cycle.end(), v - 1) != cycle.end())
                throw std::domain_error("Permutation: repeated point in cycle");
            cycle.push_back(v - 1);
        }
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const int from = cycle[k];
            const int to = cycle[(k + 1) % cycle.size()];
            if (p.images[static_cast<std::size_t>(from)] != from)
                throw std::domain_error("Permutation: point appears in two cycles");
            p.images[static_cast<std::size_t>(from)] = to;
        }
        skip_ws();
    }
    // bijectivity check
    std::vector<char> seen(p.images.size(), 0);
    for (int img : p.images) {
        if (img < 0 || img >= degree || seen[static_cast<std::size_t>(img)])
            throw std::domain_error("Permutation: not a bijection");
        seen[static_cast<std::size_t>(img)] = 1;
    }
    return p;
}

std::string Permutation::cycle_notation() const {
    std::string out;
    std::vector<char> seen(images.size(), 0);
    for (int start = 0; start < degree(); ++start) {
        if (seen[static_cast<std::size_t>(start)] || images[static_cast<std::size_t>(start)] == start)
            continue;
        out += '(';
        int p = start;
        bool first = true;
        while (!seen[static_cast<std::size_t>(p)]) {
            seen[static_cast<std::size_t>(p)] = 1;
            if (!first) out += ' ';
            out += std::to_string(p + 1);
            first = false;
            p = images[static_cast<std::size_t>(p)];
        }
        out += ')';
    }
    return out.empty() ? "()" : out;
}

std::uint32_t Permutation::apply_block(std::uint32_t block, int n_points) const {
    std::uint32_t out = 0;
    for (int p = 1; p <= n_points; ++p)
        if ((block >> (n_points - p)) & 1u) out |= 1u << (n_points - apply(p));
    return out;
}

Permutation Permutation::compose(const Permutation& then) const {
    if (degree() != then.degree()) throw std::domain_error("Permutation: degree mismatch");
    Permutation out;
    out.images.resize(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
        out.images[i] = then.images[static_cast<std::size_t>(images[i])];
    return out;
}

PermGroup::PermGroup(int degree_, std::vector<Permutation> generators_)
    : degree(degree_), generators(std::move(generators_)) {
    if (degree <= 0 || degree > 24) throw std::domain_error("PermGroup: degree must be in 1..24");
    for (const auto& g : generators)
        if (g.degree() != degree) throw std::domain_error("PermGroup: generator degree mismatch");
}

PermGroup PermGroup::from_cycle_strings(int degree, const std::vector<std::string>& cycles) {
    std::vector<Permutation> gens;
    gens.reserve(cycles.size());
    for (const auto& c : cycles) gens.push_back(Permutation::from_cycles(c, degree));
    return PermGroup(degree, std::move(gens));
}

std::vector<std::uint32_t> orbit(const PermGroup& group, std::uint32_t seed_block) {
    if (seed_block >> group.degree) throw std::domain_error("orbit: block outside point set");
    std::set<std::uint32_t> seen{seed_block};
    std::vector<std::uint32_t> frontier{seed_block};
    while (!frontier.empty()) {
        std::vector<std::uint32_t> next;
        for (std::uint32_t b : frontier)
            for (const auto& g : group.generators) {
                const std::uint32_t img = g.apply_block(b, group.degree);
                if (seen.insert(img).second) next.push_back(img);
            }
        frontier = std::move(next);
    }
    return {seen.begin(), seen.end()};
}

std::uint64_t group_order(const PermGroup& group) {
    if (group.degree > 16) throw std::domain_error("group_order: degree must be at most 16");
    std::set<std::vector<int>> seen{Permutation::identity(group.degree).images};
    std::vector<Permutation> frontier{Permutation::identity(group.degree)};
    while (!frontier.empty()) {
        std::vector<Permutation> next;
        for (const auto& p : frontier)
            for (const auto& g : group.generators) {
                Permutation q = p.compose(g);
                if (seen.insert(q.images).second) next.push_back(q);
            }
        frontier = std::move(next);
    }
    return seen.size();
}

SeedCheck verify_seed(const SeedFamily& seed) {
    if (seed.families.empty() || seed.families.front().empty())
        throw std::domain_error("verify_seed: families must be nonempty");
    for (const auto& fam : seed.families) {
        if (fam.empty()) throw std::domain_error("verify_seed: families must be nonempty");
        for (std::uint32_t b : fam) {
            if (b >> seed.n_points)
                throw std::domain_error("verify_seed: block outside point set");
            if (std::popcount(b) != seed.w)
                throw std::domain_error("verify_seed: block size differs from w");
        }
    }
    // disjointness is part of the definition
    std::set<std::uint32_t> all;
    for (const auto& fam : seed.families) {
        std::set<std::uint32_t> fam_set(fam.begin(), fam.end());
        for (std::uint32_t b : fam_set)
            if (!all.insert(b).second)
                throw std::domain_error("verify_seed: families are not disjoint");
    }

    SeedCheck check;
    for (int order = 0; order <= seed.d; ++order) {
        for (std::uint32_t e : subsets_of_size(seed.n_points, order)) {
            std::optional<Rational> ref;
            for (std::size_t i = 0; i < seed.families.size(); ++i) {
                const auto& fam = seed.families[i];
                long long cnt = 0;
                for (std::uint32_t b : fam)
                    if ((b & e) == e) ++cnt;
                Rational lam(cnt, static_cast<long long>(fam.size()));
                if (!ref) {
                    ref = lam;
                } else if (!(lam == *ref)) {
                    check.passed = false;
                    check.violation = SeedViolation{e, 0, static_cast<int>(i), *ref, lam};
                    return check;
                }
            }
            check.lambda[e] = *ref;
        }
    }
    check.passed = true;
    return check;
}

PermGroup group_833() {
    return PermGroup::from_cycle_strings(
        8, {"(1 2)(3 4)", "(1 4)(2 3)", "(5 6)(7 8)", "(5 8)(6 7)", "(1 2 3)(5 6 7)"});
}

SeedFamily construct_833() {
    const PermGroup g = group_833();
    SeedFamily seed;
    seed.n_points = 8;
    seed.w = 4;
    seed.d = 3;
    for (const auto& base : {std::vector<int>{1, 2, 5, 6}, std::vector<int>{1, 3, 5, 6},
                             std::vector<int>{1, 4, 5, 6}})
        seed.families.push_back(orbit(g, block_from_positions(base, 8)));
    return seed;
}

std::string SeedFamily::to_json() const {
    nlohmann::json j;
    j["n_points"] = n_points;
    j["w"] = w;
    j["d"] = d;
    auto fams = nlohmann::json::array();
    for (const auto& fam : families) {
        auto jf = nlohmann::json::array();
        for (std::uint32_t b : fam) jf.push_back(block_positions(b, n_points));
        fams.push_back(jf);
    }
    j["families"] = fams;
    return j.dump(2);
}

SeedFamily SeedFamily::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SeedFamily seed;
    seed.n_points = j.at("n_points").get<int>();
    seed.w = j.at("w").get<int>();
    seed.d = j.at("d").get<int>();
    for (const auto& jf : j.at("families")) {
        std::vector<std::uint32_t> fam;
        for (const auto& jb : jf)
            fam.push_back(block_from_positions(jb.get<std::vector<int>>(), seed.n_points));
        seed.families.push_back(std::move(fam));
    }
    return seed;
}

} // namespace jc
