#include "gfam/certify.hpp"

#include "gfam/certificate_io.hpp"
#include "gfam/errors.hpp"
#include "gfam/random.hpp"
#include "gfam/schreier.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gfam {

BlockSequence::BlockSequence(std::vector<Vector> vectors) : vectors_(std::move(vectors))
{
    for (std::size_t i = 0; i < vectors_.size(); ++i)
        for (std::size_t j = i + 1; j < vectors_.size(); ++j)
            for (const auto& [b, v] : vectors_[i].entries())
                if (vectors_[j].get(b) != 0)
                    throw std::invalid_argument("blocks " + std::to_string(i + 1) + " and " +
                                                std::to_string(j + 1) + " share " +
                                                b.to_string());
}

std::string_view to_string(Ell1Mode mode)
{
    switch (mode) {
    case Ell1Mode::Skipped:
        return "SKIPPED";
    case Ell1Mode::Attached:
        return "ATTACHED";
    case Ell1Mode::Basis:
        return "BASIS";
    }
    return "?";
}

std::string Ell1Certificate::to_string() const
{
    std::ostringstream out;
    out << "ell1 mode=" << gfam::to_string(mode) << " ladder=" << ladder.to_string()
        << " n0=" << n0 << " n=" << n << '\n'
        << "c=" << gfam::to_string(c) << " constant=" << gfam::to_string(constant) << '\n'
        << "sigma " << sigma.to_string() << '\n'
        << "unions=" << unions_certified << " samples=" << samples_checked << '\n';
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        out << "BLOCK " << k + 1 << " sigma=" << b.sigma.to_string() << " set="
            << b.set.to_string() << '\n';
        if (b.cert)
            out << dump_certificate(*b.cert, 1);
    }
    return out.str();
}

namespace {

Ell1Outcome failed(std::string clause, std::string message)
{
    Ell1Outcome o;
    o.failure = HypothesisFailure{std::move(clause), std::move(message)};
    return o;
}

std::string block(std::size_t k)
{
    return "block " + std::to_string(k + 1);
}

// Index sets G inside 1..K carrying the l1 estimate.
std::vector<FinSet> admissible_groups(const Ladder& ladder, std::uint64_t n, std::size_t count)
{
    std::vector<std::uint64_t> all(count);
    for (std::size_t k = 0; k < count; ++k)
        all[k] = k + 1;
    const FinSet universe(all);
    std::vector<FinSet> out;
    if (n == 0 || ladder.regime == FamilyParams::Regime::Plain)
        out = schreier_enumerate(Ordinal::natural(n), universe);
    else
        out = enumerate_hereditary(universe, [&](const FinSet& s) {
            return schreier_iterated_member(ladder.alpha, n, s);
        });
    out.erase(std::remove_if(out.begin(), out.end(), [](const FinSet& s) { return s.empty(); }),
              out.end());
    return out;
}

std::optional<Ell1Outcome> common_checks(const BlockSequence& seq,
                                         const std::vector<BlockWitness>& data,
                                         const Rational& c, const Ladder& ladder,
                                         std::uint64_t n0)
{
    if (seq.size() == 0)
        return failed("nonempty", "the sequence is empty");
    if (data.size() != seq.size())
        return failed("data", std::to_string(data.size()) + " witnesses for " +
                                  std::to_string(seq.size()) + " blocks");
    if (c <= 0)
        return failed("constant", "c must be positive");
    if (n0 == 0)
        return failed("level", "base level n0 must be at least 1");
    std::set<Branch> used;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& d = data[k];
        if (d.set.empty())
            return failed("nonempty", block(k) + ": F_k is empty");
        for (const auto& b : d.set) {
            if (seq[k].get(b) == 0)
                return failed("support", block(k) + ": " + b.to_string() +
                                             " is outside the support of x_k");
            if (!used.insert(b).second)
                return failed("disjoint", block(k) + ": " + b.to_string() +
                                              " belongs to an earlier F_j");
        }
        const auto value = abs(functional_apply(d.set, seq[k]));
        if (!(value > c))
            return failed("norming", block(k) + ": |F_k(x_k)| = " + to_string(value) +
                                         " is not above c = " + to_string(c));
        if (!d.cert)
            return failed("block-certificate", block(k) + ": missing certificate");
        const auto v = verify_certificate(ladder.level(n0), d.set, d.sigma, d.cert);
        if (!v)
            return failed("block-certificate", block(k) + ": " + v.describe());
    }
    return std::nullopt;
}

// Certifies every union over admissible G at level n0+n and cross-checks the
// norm estimate on unit, zero and seeded random coefficients.
Ell1Outcome conclude(Ell1Mode mode, const BlockSequence& seq,
                     const std::vector<BlockWitness>& data, const Branch& sigma,
                     const Rational& c, std::uint64_t n, const Ladder& ladder, std::uint64_t n0,
                     const CertifyOptions& options)
{
    Ell1Certificate cert;
    cert.mode = mode;
    cert.ladder = ladder;
    cert.n0 = n0;
    cert.n = n;
    cert.c = c;
    cert.constant = 2 * c * pow2_inv(static_cast<unsigned>(n0 + n));
    cert.sigma = sigma;
    cert.blocks = data;

    std::vector<Branch> all;
    for (const auto& d : data)
        all.insert(all.end(), d.set.begin(), d.set.end());
    SearchLimits limits;
    limits.max_family = 31;
    if (all.size() > limits.max_family)
        return failed("cap", "union of all F_k has " + std::to_string(all.size()) +
                                 " branches, above the solver cap of 31");
    MembershipSolver solver(BranchSet(all), limits);
    const auto level = ladder.level(n0 + n);

    std::vector<Rational> signs;
    for (std::size_t k = 0; k < data.size(); ++k)
        signs.push_back(functional_apply(data[k].set, seq[k]) > 0 ? Rational(1) : Rational(-1));

    NormEnclosure lambda;
    if (options.cross_check)
        lambda = lambda_constant(options.truncation, ladder.alpha);
    SplitMix64 rng(options.seed);

    for (const auto& g : admissible_groups(ladder, n, seq.size())) {
        std::vector<Branch> members;
        for (auto k : g)
            members.insert(members.end(), data[k - 1].set.begin(), data[k - 1].set.end());
        const BranchSet uni(members);
        if (uni.contains(sigma))
            return failed("union", "sigma lies in the union over " + g.to_string());
        if (!solver.decide(level, solver.mask_of(uni), sigma))
            return failed("union", "union over G = " + g.to_string() +
                                       " is not certified with sigma at " + level.to_string());
        ++cert.unions_certified;
        if (!options.cross_check)
            continue;

        std::vector<std::vector<Rational>> samples;
        samples.emplace_back(g.size(), Rational(1));
        for (std::size_t s = 0; s < options.random_samples; ++s) {
            std::vector<Rational> t;
            for (std::size_t i = 0; i < g.size(); ++i)
                t.emplace_back(static_cast<long>(rng.below(5)), static_cast<long>(1 + rng.below(4)));
            for (auto& q : t)
                q.canonicalize();
            samples.push_back(std::move(t));
        }
        for (const auto& t : samples) {
            Vector y;
            Rational total = 0;
            std::size_t i = 0;
            for (auto k : g) {
                y += seq[k - 1].scaled(t[i] * signs[k - 1]);
                total += t[i];
                ++i;
            }
            const auto enclosure = norm_composite(y, ladder, ladder.alpha, options.truncation);
            // Normalized basis e_tau / lambda: divide by the upper bound of lambda.
            if (enclosure.lower / lambda.upper < cert.constant * total)
                return failed("cross-check", "G = " + g.to_string() + ": lower enclosure " +
                                                 to_string(enclosure.lower / lambda.upper) +
                                                 " below " + to_string(cert.constant * total));
            ++cert.samples_checked;
        }
    }
    Ell1Outcome o;
    o.cert = std::move(cert);
    return o;
}

} // namespace

Ell1Outcome check_skipped_hypotheses(const BlockSequence& seq,
                                     const std::vector<BlockWitness>& data, const Branch& sigma,
                                     const Rational& c, std::uint64_t n, const Ladder& ladder,
                                     std::uint64_t n0, const CertifyOptions& options)
{
    if (auto f = common_checks(seq, data, c, ladder, n0))
        return *f;
    std::size_t previous = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& d = data[k];
        if (d.sigma == sigma)
            return failed("sigma-distinct", block(k) + ": sigma_k equals sigma");
        const auto meet = meet_length(sigma, d.sigma);
        if (k == 0 && meet == 0)
            return failed("meet-chain", "sigma ^ sigma_1 is empty");
        if (k > 0 && meet <= previous)
            return failed("meet-chain", block(k) + ": |sigma ^ sigma_k| = " +
                                            std::to_string(meet) + " does not exceed " +
                                            std::to_string(previous));
        if (!(meet < d.cert->varmin))
            return failed("below-varmin", block(k) + ": |sigma ^ sigma_k| = " +
                                              std::to_string(meet) + " is not below varmin " +
                                              std::to_string(d.cert->varmin));
        previous = meet;
    }
    return conclude(Ell1Mode::Skipped, seq, data, sigma, c, n, ladder, n0, options);
}

Ell1Outcome check_attached_hypotheses(const BlockSequence& seq,
                                      const std::vector<BlockWitness>& data, const Branch& sigma,
                                      const Rational& c, std::uint64_t n, const Ladder& ladder,
                                      std::uint64_t n0, const CertifyOptions& options)
{
    if (auto f = common_checks(seq, data, c, ladder, n0))
        return *f;
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (data[k].sigma != sigma)
            return failed("shared-sigma", block(k) + ": certified with " +
                                              data[k].sigma.to_string() + " instead of sigma");
        if (k > 0 && !(data[k - 1].cert->varmax < data[k].cert->varmin))
            return failed("separation", "varmax(F_" + std::to_string(k) + ") = " +
                                            std::to_string(data[k - 1].cert->varmax) +
                                            " is not below varmin(F_" + std::to_string(k + 1) +
                                            ") = " + std::to_string(data[k].cert->varmin));
    }
    return conclude(Ell1Mode::Attached, seq, data, sigma, c, n, ladder, n0, options);
}

Ell1Outcome check_basis_estimate(const PhiWitness& phi, std::uint64_t n, unsigned truncation)
{
    const auto regime = phi.params.regime();
    const Ladder ladder = regime == FamilyParams::Regime::Plain ? Ladder::plain()
                                                                : Ladder::schreier(phi.params.alpha());
    const auto lambda = lambda_constant(truncation, ladder.alpha);
    Ell1Certificate cert;
    cert.mode = Ell1Mode::Basis;
    cert.ladder = ladder;
    cert.n0 = 0;
    cert.n = n;
    cert.c = 1;
    cert.constant = lambda.lower * pow2_inv(static_cast<unsigned>(n)) / lambda.upper;
    cert.sigma = phi.sigma;
    for (const auto& t : phi.tau)
        cert.blocks.push_back(BlockWitness{BranchSet{t}, phi.sigma, nullptr});

    for (const auto& g : admissible_groups(ladder, n, phi.tau.size())) {
        Vector x;
        for (auto k : g)
            x.set(phi.tau[k - 1], 1);
        const auto e = norm_composite(x, ladder, ladder.alpha, truncation);
        const Rational bound = cert.constant * static_cast<long>(g.size());
        if (e.lower / lambda.upper < bound)
            return failed("basis-estimate", "F = " + g.to_string() + ": " +
                                                to_string(e.lower / lambda.upper) + " < " +
                                                to_string(bound));
        ++cert.unions_certified;
        ++cert.samples_checked;
    }
    Ell1Outcome o;
    o.cert = std::move(cert);
    return o;
}

bool small_functional_bound(const Vector& x, const FamilyParams& level, const Rational& eps)
{
    return norm_xn(x, level).value < eps;
}

namespace {

ExtractionOutcome extraction_failed(std::string clause, std::string message)
{
    ExtractionOutcome o;
    o.failure = HypothesisFailure{std::move(clause), std::move(message)};
    return o;
}

} // namespace

ExtractionOutcome extract_high_varmin(const BranchSet& set, const Branch& sigma,
                                      const Certificate& cert, const Vector& x,
                                      const Rational& c, std::uint64_t m, const Ladder& ladder,
                                      std::uint64_t n0)
{
    const auto level = ladder.level(n0);
    if (auto v = verify_certificate(level, set, sigma, cert); !v)
        return extraction_failed("certificate", v.describe());
    if (!(abs(functional_apply(set, x)) > c))
        return extraction_failed("norming", "|F(x)| is not above c");
    if (cert->kind == NodeKind::Lift)
        return extraction_failed("top-node", "top node is a lift; no parts to drop");

    std::vector<BranchSet> parts;
    if (cert->kind == NodeKind::Leaf) {
        for (const auto& b : cert->chain)
            parts.push_back(BranchSet{b});
    } else {
        for (const auto& p : cert->parts)
            parts.push_back(BranchSet(certificate_leaves(*p.node)));
    }
    if (m >= parts.size())
        return extraction_failed("parts", "dropping " + std::to_string(m) + " of " +
                                              std::to_string(parts.size()) +
                                              " parts leaves nothing");
    if (m > 0) {
        // Each dropped part is a member one level down, so the level norm bound
        // implies the per-part bound; the per-part values are checked directly.
        const Rational eps = c / (2 * Rational(static_cast<long>(m)));
        bool small = true;
        for (std::size_t i = 0; i < m && small; ++i)
            small = abs(functional_apply(parts[i], x)) < eps;
        if (!small)
            small = cert->kind == NodeKind::Leaf
                        ? x.sup() < eps
                        : small_functional_bound(x, ladder.level(n0 - 1), eps);
        if (!small)
            return extraction_failed("smallness", "a dropped part is worth at least c/(2m) = " +
                                                      to_string(eps));
    }
    std::vector<Branch> kept;
    for (std::size_t i = m; i < parts.size(); ++i)
        kept.insert(kept.end(), parts[i].begin(), parts[i].end());
    Extraction e{BranchSet(kept), nullptr};
    e.cert = restrict_certificate(level, set, sigma, cert, e.set);
    if (!(abs(functional_apply(e.set, x)) > c / 2))
        return extraction_failed("conclusion-value", "|G(x)| is not above c/2");
    if (!(e.cert->varmin > m))
        return extraction_failed("conclusion-varmin", "varmin(G, sigma) does not exceed m");
    ExtractionOutcome o;
    o.result = std::move(e);
    return o;
}

// ----------------------------------------------------------------- refine

namespace {

// Majority walk down the tree of the votes; both tails at the end.
std::vector<Branch> cluster_sigma(const std::vector<Branch>& votes,
                                  const std::vector<BlockWitness>& blocks)
{
    std::size_t depth = 0;
    for (const auto& b : votes)
        depth = std::max(depth, b.word().size() + 2);
    std::vector<const Branch*> live;
    for (const auto& b : votes)
        live.push_back(&b);
    std::string word;
    // A single remaining vote is no cluster; stop there.
    for (std::size_t d = 0; d < depth && live.size() >= 2; ++d) {
        std::size_t ones = 0;
        for (const auto* b : live)
            ones += b->bit(d);
        const bool bit = 2 * ones > live.size();
        word.push_back(bit ? '1' : '0');
        std::vector<const Branch*> next;
        for (const auto* b : live)
            if (b->bit(d) == bit)
                next.push_back(b);
        live = std::move(next);
    }
    std::vector<Branch> out;
    for (bool tail : {false, true}) {
        Branch s(word, tail);
        bool inside = false;
        for (const auto& blk : blocks)
            inside = inside || blk.set.contains(s);
        if (!inside && std::find(out.begin(), out.end(), s) == out.end())
            out.push_back(s);
    }
    return out;
}

} // namespace

RefineReport refine_to_certificate(const BlockSequence& seq, std::uint64_t n,
                                   const RefineOptions& options)
{
    RefineReport report;
    std::ostringstream evidence;
    const auto& ladder = options.ladder;
    if (seq.size() == 0) {
        report.step = "empty sequence";
        return report;
    }

    std::uint64_t n0 = 0;
    std::vector<XnNorm> norms;
    for (std::uint64_t level = 1; level <= options.scan_levels; ++level) {
        std::vector<XnNorm> at;
        Rational least;
        for (std::size_t k = 0; k < seq.size(); ++k) {
            at.push_back(norm_xn(seq[k], ladder.level(level)));
            if (k == 0 || at.back().value < least)
                least = at.back().value;
        }
        evidence << "level " << level << ": min_k ||x_k|| = " << to_string(least) << '\n';
        if (least >= options.activity) {
            n0 = level;
            norms = std::move(at);
            break;
        }
    }
    if (n0 == 0) {
        report.tsirelson_route = true;
        report.step = "no active level up to " + std::to_string(options.scan_levels) +
                      " (threshold " + to_string(options.activity) + ")";
        report.evidence = evidence.str();
        return report;
    }
    evidence << "least active level n0 = " << n0 << '\n';

    const auto level = ladder.level(n0);
    std::vector<BlockWitness> blocks;
    Rational least = 0;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        blocks.push_back(BlockWitness{norms[k].witness, Branch(), nullptr});
        if (k == 0 || norms[k].value < least)
            least = norms[k].value;
    }
    const Rational c = least / 2;
    evidence << "c = " << to_string(c) << '\n';

    std::vector<Branch> votes;
    for (const auto& b : blocks)
        votes.push_back(b.set[0]);
    const auto sigmas = cluster_sigma(votes, blocks);
    if (sigmas.empty()) {
        report.step = "no clustered sigma outside the norming sets";
        report.evidence = evidence.str();
        return report;
    }

    std::string first_failure;
    auto note = [&](const std::string& s) {
        evidence << s << '\n';
        if (first_failure.empty())
            first_failure = s;
    };

    for (const auto& sigma : sigmas) {
        evidence << "sigma candidate " << sigma.to_string() << '\n';

        // Case 1: witnesses leave sigma one after another below their blocks.
        {
            auto data = blocks;
            std::size_t previous = 0;
            bool ok = true;
            for (std::size_t k = 0; k < data.size() && ok; ++k) {
                std::optional<std::pair<std::size_t, BlockWitness>> best;
                MembershipSolver solver(data[k].set, SearchLimits{31, 64});
                for (const auto& cand : candidate_witnesses(data[k].set, 0, true)) {
                    if (cand == sigma)
                        continue;
                    const auto meet = meet_length(sigma, cand);
                    if (meet == kInfiniteMeet || meet <= previous || meet == 0)
                        continue;
                    if (best && best->first <= meet)
                        continue;
                    auto c_k = solver.decide(level, solver.full_mask(), cand);
                    if (!c_k || !(meet < (*c_k)->varmin))
                        continue;
                    best.emplace(meet, BlockWitness{data[k].set, cand, *c_k});
                }
                if (!best) {
                    note("case 1: no witness sigma_" + std::to_string(k + 1) +
                         " leaving sigma below its block");
                    ok = false;
                    break;
                }
                previous = best->first;
                data[k] = best->second;
            }
            if (ok) {
                auto o = check_skipped_hypotheses(seq, data, sigma, c, n, ladder, n0,
                                                  options.certify);
                if (o) {
                    report.cert = std::move(o.cert);
                    report.evidence = evidence.str();
                    return report;
                }
                note("case 1: " + o.failure->describe());
            }
        }

        // Case 2: blocks certified at sigma itself, separated by extraction.
        {
            auto data = blocks;
            bool ok = true;
            for (std::size_t k = 0; k < data.size() && ok; ++k) {
                auto c_k = decide_membership(level, data[k].set, sigma, SearchLimits{31, 64});
                if (!c_k) {
                    note("case 2: block " + std::to_string(k + 1) + " is not certified at sigma");
                    ok = false;
                    break;
                }
                data[k].sigma = sigma;
                data[k].cert = *c_k;
            }
            if (!ok)
                continue;
            Rational c2 = c;
            for (std::size_t k = 1; k < data.size() && ok; ++k) {
                const auto gap = data[k - 1].cert->varmax;
                if (gap < data[k].cert->varmin)
                    continue;
                auto e = extract_high_varmin(data[k].set, sigma, data[k].cert, seq[k], c, gap,
                                             ladder, n0);
                if (!e) {
                    note("case 2: extraction for block " + std::to_string(k + 1) + " failed " +
                         e.failure->describe());
                    ok = false;
                    break;
                }
                data[k].set = e.result->set;
                data[k].cert = e.result->cert;
                c2 = c / 2;
            }
            if (!ok)
                continue;
            auto o = check_attached_hypotheses(seq, data, sigma, c2, n, ladder, n0,
                                               options.certify);
            if (o) {
                report.cert = std::move(o.cert);
                report.evidence = evidence.str();
                return report;
            }
            note("case 2: " + o.failure->describe());
        }
    }
    report.step = first_failure;
    report.evidence = evidence.str();
    return report;
}

} // namespace gfam
