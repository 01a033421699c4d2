#pragma once

#include "gfam/families.hpp"
#include "gfam/norms.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gfam {

/// Disjointly supported vectors x_1, x_2, ...
class BlockSequence {
public:
    BlockSequence() = default;
    /// Throws std::invalid_argument naming the first overlapping pair.
    explicit BlockSequence(std::vector<Vector> vectors);

    const std::vector<Vector>& vectors() const noexcept { return vectors_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    const Vector& operator[](std::size_t k) const { return vectors_[k]; }

private:
    std::vector<Vector> vectors_;
};

/// F_k with its witness and certificate at the base level n0.
struct BlockWitness {
    BranchSet set;
    Branch sigma;
    Certificate cert;
};

enum class Ell1Mode { Skipped, Attached, Basis };
std::string_view to_string(Ell1Mode mode);

/// Lower l1 estimate: ||sum_{k in G} t_k x_k|| >= constant * sum t_k for
/// every G in S_n inside the sequence and nonnegative t, where x_k is read in
/// the normalized basis e_tau / lambda and signed so that F_k(x_k) > 0.
struct Ell1Certificate {
    Ell1Mode mode = Ell1Mode::Skipped;
    Ladder ladder;
    std::uint64_t n0 = 1;
    std::uint64_t n = 0;
    Rational c;
    Rational constant;
    Branch sigma;
    std::vector<BlockWitness> blocks;
    std::size_t unions_certified = 0;
    std::size_t samples_checked = 0;

    std::string to_string() const;
};

/// First violated hypothesis, by clause name.
struct HypothesisFailure {
    std::string clause;
    std::string message;

    std::string describe() const { return "[" + clause + "] " + message; }
};

struct Ell1Outcome {
    std::optional<Ell1Certificate> cert;
    std::optional<HypothesisFailure> failure;

    explicit operator bool() const noexcept { return cert.has_value(); }
};

struct CertifyOptions {
    unsigned truncation = 12;       // composite-norm truncation in the cross-check
    std::size_t random_samples = 2; // per union, besides unit and zero coefficients
    std::uint64_t seed = 1;
    bool cross_check = true;
};

/// Hypotheses of the skipped construction: |F_k(x_k)| > c, F_k inside supp x_k
/// and pairwise disjoint, (F_k, sigma_k) certified at level n0, sigma != sigma_k,
/// |sigma ^ sigma_k| strictly increasing from at least 1 and below varmin(F_k, sigma_k).
/// On success every union over G in S_n is certified with sigma at level
/// n0 + n and the constant 2c / 2^(n0+n) is cross-checked.
Ell1Outcome check_skipped_hypotheses(const BlockSequence& seq,
                                     const std::vector<BlockWitness>& data, const Branch& sigma,
                                     const Rational& c, std::uint64_t n, const Ladder& ladder,
                                     std::uint64_t n0, const CertifyOptions& options = {});

/// As above with every block certified at sigma and varmax(F_k) < varmin(F_{k+1}).
Ell1Outcome check_attached_hypotheses(const BlockSequence& seq,
                                      const std::vector<BlockWitness>& data, const Branch& sigma,
                                      const Rational& c, std::uint64_t n, const Ladder& ladder,
                                      std::uint64_t n0, const CertifyOptions& options = {});

/// Basis estimate for e~_{phi(j)}: for every F in S_n inside 1..m and unit
/// coefficients the composite lower enclosure divided by lambda_upper is at
/// least lambda_lower / 2^n * #F / lambda_upper.
Ell1Outcome check_basis_estimate(const PhiWitness& phi, std::uint64_t n, unsigned truncation);

/// sup |F(x)| over the level-n family is below eps.
bool small_functional_bound(const Vector& x, const FamilyParams& level, const Rational& eps);

struct Extraction {
    BranchSet set;
    Certificate cert;
};

struct ExtractionOutcome {
    std::optional<Extraction> result;
    std::optional<HypothesisFailure> failure;

    explicit operator bool() const noexcept { return result.has_value(); }
};

/// Drops the first m parts of the top node of a level-n0 certificate for
/// (F, sigma), giving G with |G(x)| > c/2 and varmin(G, sigma) > m. Requires
/// |F(x)| > c and every dropped part worth less than c/(2m), checked on the
/// parts themselves (the level n0-1 norm below c/(2m) is sufficient).
ExtractionOutcome extract_high_varmin(const BranchSet& set, const Branch& sigma,
                                      const Certificate& cert, const Vector& x,
                                      const Rational& c, std::uint64_t m, const Ladder& ladder,
                                      std::uint64_t n0);

struct RefineReport {
    std::optional<Ell1Certificate> cert;
    bool tsirelson_route = false;
    std::string step;     // first step that could not be completed
    std::string evidence; // level norms and the attempted hypotheses

    explicit operator bool() const noexcept { return cert.has_value(); }
};

struct RefineOptions {
    std::uint64_t scan_levels = 4;
    Rational activity = Rational(1, 100); // a level is active when every ||x_k||_n reaches this
    Ladder ladder;
    CertifyOptions certify;
};

/// Finite-scale case analysis: find the least active level n0, extract
/// norming sets F_k, pick sigma by majority longest common prefix, then try
/// the skipped and attached constructions (the latter after extracting high
/// varmin parts). Returns a certificate or the first failing step.
RefineReport refine_to_certificate(const BlockSequence& seq, std::uint64_t n,
                                   const RefineOptions& options = {});

} // namespace gfam
