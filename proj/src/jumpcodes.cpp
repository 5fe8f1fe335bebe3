#include "jc/jumpcodes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace jc {

void JumpCode::check_invariants() const {
    if (dimension != static_cast<int>(codewords.size()))
        throw std::domain_error("JumpCode: dimension does not match codeword count");
    for (const auto& c : codewords) {
        if (c.n_qubits != n_qubits) throw std::domain_error("JumpCode: qubit count mismatch");
        for (Eigen::Index x = 0; x < c.dim(); ++x)
            if (std::abs(c[x]) > 1e-14 &&
                std::popcount(static_cast<std::uint32_t>(x)) != weight)
                throw std::domain_error("JumpCode: codeword leaves the weight class");
    }
    for (int i = 0; i < dimension; ++i)
        for (int j = i; j < dimension; ++j) {
            const cplx g = codewords[static_cast<std::size_t>(i)].inner(
                codewords[static_cast<std::size_t>(j)]);
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(g - want) > 1e-12)
                throw std::domain_error("JumpCode: codewords are not orthonormal");
        }
}

JumpCode encode(const SeedFamily& seed) {
    if (seed.families.empty()) throw std::domain_error("encode: empty seed family");
    std::set<std::uint32_t> all;
    for (const auto& fam : seed.families) {
        if (fam.empty()) throw std::domain_error("encode: empty family");
        for (std::uint32_t b : fam) {
            if (std::popcount(b) != seed.w)
                throw std::domain_error("encode: block size differs from w");
            if (!all.insert(b).second)
                throw std::domain_error("encode: families overlap");
        }
    }
    JumpCode code;
    code.n_qubits = seed.n_points;
    code.weight = seed.w;
    code.order = seed.d;
    code.dimension = static_cast<int>(seed.families.size());
    code.families = seed;
    for (const auto& fam : seed.families) {
        StateVector c(seed.n_points);
        c.amps.setZero();
        const double amp = 1.0 / std::sqrt(static_cast<double>(fam.size()));
        for (std::uint32_t b : fam) c.amps[b] = amp;
        code.codewords.push_back(std::move(c));
    }
    code.check_invariants();
    return code;
}

namespace {

// exact count ratio sum_{x in supp(c), x superset E} |amp|^2 when all nonzero
// amplitudes share one magnitude
std::optional<Rational> support_fraction(const StateVector& c, std::uint32_t e) {
    long long total = 0, hit = 0;
    double mag = -1.0;
    for (Eigen::Index x = 0; x < c.dim(); ++x) {
        const double a = std::abs(c[x]);
        if (a <= 1e-14) continue;
        if (mag < 0.0)
            mag = a;
        else if (std::abs(a - mag) > 1e-12)
            return std::nullopt;
        ++total;
        if ((static_cast<std::uint32_t>(x) & e) == e) ++hit;
    }
    if (total == 0) return std::nullopt;
    return Rational(hit, total);
}

std::vector<std::uint32_t> masks_of_size(int n, int size) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t e = 0; e < (1u << n); ++e)
        if (std::popcount(e) == size) out.push_back(e);
    return out;
}

} // namespace

VerificationReport verify_code(const JumpCode& code, int d, const DecayModel& model) {
    if (code.n_qubits != model.n_qubits)
        throw std::domain_error("verify_code: qubit count mismatch");
    if (d < 0) throw std::domain_error("verify_code: negative order");
    if (d > code.weight)
        throw std::domain_error(
            "verify_code: order exceeds the excitation weight; J_E annihilates the code");
    code.check_invariants();

    constexpr double tol = 1e-10;
    VerificationReport report;
    report.passed = true;
    const int k = code.dimension;

    for (int size = 0; size <= d; ++size) {
        for (std::uint32_t e : masks_of_size(code.n_qubits, size)) {
            const SparseOperator j_op =
                jump_product(model, JumpSet::from_mask(e, code.n_qubits));
            std::vector<StateVector> jumped;
            jumped.reserve(static_cast<std::size_t>(k));
            for (const auto& c : code.codewords) jumped.push_back(apply(j_op, c));

            double diag0 = 0.0;
            for (int i = 0; i < k; ++i) {
                for (int j = i; j < k; ++j) {
                    const cplx g = jumped[static_cast<std::size_t>(i)].inner(
                        jumped[static_cast<std::size_t>(j)]);
                    if (i == j) {
                        if (i == 0) diag0 = g.real();
                        if (std::abs(g.real() - diag0) > tol) {
                            report.passed = false;
                            report.violations.push_back(
                                {i, i, e, std::abs(g.real() - diag0)});
                        }
                    } else if (std::abs(g) > tol) {
                        report.passed = false;
                        report.violations.push_back({i, j, e, std::abs(g)});
                    }
                }
            }
            LambdaEntry entry;
            entry.e = e;
            entry.scaled = diag0;
            // rate-free count ratio, defined for equal-amplitude codewords
            auto frac = support_fraction(code.codewords.front(), e);
            for (int i = 1; frac && i < k; ++i) {
                auto fi = support_fraction(code.codewords[static_cast<std::size_t>(i)], e);
                if (!fi || !(*fi == *frac)) frac = std::nullopt;
            }
            entry.fraction = frac;
            report.lambda_table.push_back(entry);
        }
    }

    // full cross-condition over pairs of distinct positions
    report.knill_cross_ok = true;
    for (int alpha = 1; alpha <= code.n_qubits && report.knill_cross_ok; ++alpha) {
        const SparseOperator la = lindblad_op(model, alpha);
        std::vector<StateVector> la_c;
        for (const auto& c : code.codewords) la_c.push_back(apply(la, c));
        for (int beta = 1; beta <= code.n_qubits && report.knill_cross_ok; ++beta) {
            if (beta == alpha) continue;
            const SparseOperator lb = lindblad_op(model, beta);
            std::vector<StateVector> lb_c;
            for (const auto& c : code.codewords) lb_c.push_back(apply(lb, c));
            cplx diag0 = 0.0;
            for (int i = 0; i < k && report.knill_cross_ok; ++i)
                for (int j = 0; j < k; ++j) {
                    const cplx g = la_c[static_cast<std::size_t>(i)].inner(
                        lb_c[static_cast<std::size_t>(j)]);
                    double defect = 0.0;
                    if (i == j) {
                        if (i == 0) diag0 = g;
                        defect = std::abs(g - diag0);
                    } else {
                        defect = std::abs(g);
                    }
                    if (defect > tol) {
                        report.knill_cross_ok = false;
                        report.knill_cross_witness = {alpha, beta, i, j, defect};
                        break;
                    }
                }
        }
    }
    return report;
}

JumpCode pairing_code(int n_qubits, double phi) {
    if (n_qubits < 2 || n_qubits % 2 != 0)
        throw std::domain_error("pairing_code: qubit count must be even and at least 2");
    const int w = n_qubits / 2;
    const std::uint32_t full = (1u << n_qubits) - 1;
    JumpCode code;
    code.n_qubits = n_qubits;
    code.weight = w;
    code.order = 1;
    code.phase = phi;
    const cplx ph = std::exp(cplx(0.0, phi));
    for (const BasisState& x : weight_subspace(n_qubits, w)) {
        const std::uint32_t bar = full ^ x.bits;
        if (x.bits > bar) continue; // the smaller member names the pair
        StateVector c(n_qubits);
        c.amps.setZero();
        c.amps[x.bits] = 1.0 / std::sqrt(2.0);
        c.amps[bar] = ph / std::sqrt(2.0);
        code.codewords.push_back(std::move(c));
    }
    code.dimension = static_cast<int>(code.codewords.size());
    code.check_invariants();
    return code;
}

JumpCode complement_code(const JumpCode& code) {
    const std::uint32_t full = (1u << code.n_qubits) - 1;
    JumpCode out;
    out.n_qubits = code.n_qubits;
    out.weight = code.n_qubits - code.weight;
    out.order = code.order;
    out.dimension = code.dimension;
    out.phase = code.phase;
    for (const auto& c : code.codewords) {
        StateVector flipped(code.n_qubits);
        flipped.amps.setZero();
        for (Eigen::Index x = 0; x < c.dim(); ++x)
            flipped.amps[full ^ static_cast<std::uint32_t>(x)] = c[x];
        out.codewords.push_back(std::move(flipped));
    }
    if (code.families) {
        SeedFamily fam = *code.families;
        for (auto& f : fam.families)
            for (auto& b : f) b = full ^ b;
        fam.w = out.weight;
        out.families = fam;
    }
    out.check_invariants();
    return out;
}

std::uint64_t upper_bound(int n_qubits, int w, int d) {
    if (d < 0 || d > w || w > n_qubits)
        throw std::domain_error("upper_bound: need 0 <= d <= w <= N");
    return std::min(detail::binomial(n_qubits - d, w - d), detail::binomial(n_qubits - d, w));
}

std::uint64_t max_upper_bound(int n_qubits, int d) {
    return upper_bound(n_qubits, n_qubits / 2, d);
}

std::string JumpCode::to_json() const {
    nlohmann::json j;
    j["N"] = n_qubits;
    j["w"] = weight;
    j["d"] = order;
    j["K"] = dimension;
    j["phase"] = phase;
    auto words = nlohmann::json::array();
    for (const auto& c : codewords) {
        auto kets = nlohmann::json::array();
        for (Eigen::Index x = 0; x < c.dim(); ++x) {
            if (std::abs(c[x]) <= 1e-14) continue;
            nlohmann::json ket;
            ket["ket"] = BasisState(static_cast<std::uint32_t>(x), n_qubits).ket();
            ket["re"] = c[x].real();
            ket["im"] = c[x].imag();
            kets.push_back(ket);
        }
        words.push_back(kets);
    }
    j["codewords"] = words;
    if (families) j["families"] = nlohmann::json::parse(families->to_json());
    return j.dump(2);
}

JumpCode JumpCode::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    JumpCode code;
    code.n_qubits = j.at("N").get<int>();
    code.weight = j.at("w").get<int>();
    code.order = j.at("d").get<int>();
    code.dimension = j.at("K").get<int>();
    code.phase = j.at("phase").get<double>();
    for (const auto& kets : j.at("codewords")) {
        StateVector c(code.n_qubits);
        c.amps.setZero();
        for (const auto& ket : kets) {
            const BasisState x = BasisState::from_ket(ket.at("ket").get<std::string>());
            c.amps[x.bits] = cplx(ket.at("re").get<double>(), ket.at("im").get<double>());
        }
        code.codewords.push_back(std::move(c));
    }
    if (j.contains("families")) code.families = SeedFamily::from_json(j.at("families").dump());
    code.check_invariants();
    return code;
}

} // namespace jc
