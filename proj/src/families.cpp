#include "gfam/families.hpp"

#include "gfam/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace gfam {

// ---------------------------------------------------------------- params

FamilyParams FamilyParams::plain(const Ordinal& alpha)
{
    if (alpha.is_zero())
        throw std::invalid_argument("plain family index must be at least 1");
    return FamilyParams(Regime::Plain, alpha, 0);
}

FamilyParams FamilyParams::schreier(const Ordinal& alpha, std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("parametric family level must be at least 1");
    return FamilyParams(Regime::Schreier, alpha, n);
}

FamilyParams FamilyParams::parse(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ParseError("regime: expected 'plain:<ordinal>' or 'schreier:<ordinal>:<n>'",
                         std::string(text), 0);
    const auto kind = text.substr(0, colon);
    auto rest = text.substr(colon + 1);
    auto ordinal_at = [&](std::string_view part, std::size_t offset) {
        try {
            return Ordinal::parse(part);
        } catch (const ParseError& e) {
            throw ParseError("regime: " + e.message(), std::string(text), offset + e.position());
        }
    };
    if (kind == "plain") {
        auto alpha = ordinal_at(rest, colon + 1);
        if (alpha.is_zero())
            throw ParseError("regime: plain index must be at least 1", std::string(text),
                             colon + 1);
        return plain(alpha);
    }
    if (kind == "schreier") {
        const auto second = rest.rfind(':');
        if (second == std::string_view::npos)
            throw ParseError("regime: expected 'schreier:<ordinal>:<n>'", std::string(text),
                             text.size());
        auto alpha = ordinal_at(rest.substr(0, second), colon + 1);
        auto n = ordinal_at(rest.substr(second + 1), colon + 1 + second + 1);
        if (!n.is_finite() || n.is_zero())
            throw ParseError("regime: level must be a positive natural", std::string(text),
                             colon + 1 + second + 1);
        return schreier(alpha, n.finite_value());
    }
    throw ParseError("regime: unknown kind (plain or schreier)", std::string(text), 0);
}

FamilyParams::Stage FamilyParams::stage() const noexcept
{
    if (regime_ == Regime::Schreier)
        return level_ == 1 ? Stage::Base : Stage::Successor;
    if (alpha_ == Ordinal::natural(1))
        return Stage::Base;
    return alpha_.is_limit() ? Stage::Limit : Stage::Successor;
}

FamilyParams FamilyParams::predecessor() const
{
    if (stage() != Stage::Successor)
        throw std::logic_error("predecessor of a non-successor family " + to_string());
    if (regime_ == Regime::Schreier)
        return schreier(alpha_, level_ - 1);
    return plain(alpha_.predecessor());
}

FamilyParams FamilyParams::limit_step(std::uint64_t k) const
{
    if (stage() != Stage::Limit)
        throw std::logic_error("limit_step of a non-limit family " + to_string());
    return plain(fundamental_step(alpha_, k));
}

FamilyParams FamilyParams::successor() const
{
    if (regime_ == Regime::Schreier)
        return schreier(alpha_, level_ + 1);
    return plain(alpha_.successor());
}

bool FamilyParams::admits(const std::vector<std::size_t>& lengths) const
{
    if (lengths.empty())
        return true;
    if (lengths.front() == 0)
        return false;
    if (regime_ == Regime::Plain)
        return lengths.size() <= lengths.front();
    std::vector<std::uint64_t> elems(lengths.begin(), lengths.end());
    for (std::size_t i = 1; i < elems.size(); ++i)
        if (elems[i - 1] >= elems[i])
            return false;
    return schreier_member(alpha_, FinSet(std::move(elems)));
}

std::string FamilyParams::to_string() const
{
    if (regime_ == Regime::Plain)
        return "plain:" + alpha_.to_string();
    return "schreier:" + alpha_.to_string() + ":" + std::to_string(level_);
}

// ------------------------------------------------------------ branch sets

BranchSet::BranchSet(std::initializer_list<Branch> items)
    : BranchSet(std::vector<Branch>(items))
{
}

BranchSet::BranchSet(std::vector<Branch> items) : items_(std::move(items))
{
    std::sort(items_.begin(), items_.end());
    if (std::adjacent_find(items_.begin(), items_.end()) != items_.end())
        throw std::invalid_argument("branch set contains a repeated branch");
}

BranchSet BranchSet::parse(std::string_view text)
{
    std::vector<Branch> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos)
            comma = text.size();
        auto item = text.substr(start, comma - start);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        if (!item.empty()) {
            try {
                out.push_back(Branch::parse(item));
            } catch (const ParseError& e) {
                throw ParseError(e.message(), std::string(text), start + e.position());
            }
        }
        start = comma + 1;
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw ParseError("branch set: repeated branch", std::string(text), 0);
    return BranchSet(std::move(out));
}

bool BranchSet::contains(const Branch& b) const
{
    return std::binary_search(items_.begin(), items_.end(), b);
}

std::size_t BranchSet::min_pairwise_meet() const
{
    if (items_.size() < 2)
        throw std::invalid_argument("min_pairwise_meet needs at least two branches");
    std::size_t best = kInfiniteMeet;
    for (std::size_t i = 0; i < items_.size(); ++i)
        for (std::size_t j = i + 1; j < items_.size(); ++j)
            best = std::min(best, meet_length(items_[i], items_[j]));
    return best;
}

std::string BranchSet::to_string() const
{
    std::string out;
    for (const auto& b : items_) {
        if (!out.empty())
            out += ',';
        out += b.to_string();
    }
    return out;
}

// ----------------------------------------------------------- certificates

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::Leaf:
        return "LEAF";
    case NodeKind::Skipped:
        return "SKIPPED";
    case NodeKind::Attached:
        return "ATTACHED";
    case NodeKind::Lift:
        return "LIFT";
    }
    return "?";
}

namespace {

void collect_leaves(const CertNode& node, std::vector<Branch>& out)
{
    switch (node.kind) {
    case NodeKind::Leaf:
        out.insert(out.end(), node.chain.begin(), node.chain.end());
        break;
    case NodeKind::Skipped:
    case NodeKind::Attached:
        for (const auto& p : node.parts)
            if (p.node)
                collect_leaves(*p.node, out);
        break;
    case NodeKind::Lift:
        if (node.inner)
            collect_leaves(*node.inner, out);
        break;
    }
}

std::pair<std::size_t, std::size_t> meet_range(const std::vector<Branch>& set, const Branch& sigma)
{
    std::size_t lo = kInfiniteMeet;
    std::size_t hi = 0;
    for (const auto& t : set) {
        const auto l = meet_length(sigma, t);
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    return {lo, hi};
}

Certificate make_leaf(std::vector<Branch> chain, std::size_t varmin, std::size_t varmax)
{
    auto n = std::make_shared<CertNode>();
    n->kind = NodeKind::Leaf;
    n->chain = std::move(chain);
    n->varmin = varmin;
    n->varmax = varmax;
    return n;
}

Certificate make_lift(const FamilyParams& level, std::uint64_t gate, Certificate inner)
{
    auto n = std::make_shared<CertNode>();
    n->kind = NodeKind::Lift;
    n->lift_level = level;
    n->gate = gate;
    n->varmin = inner->varmin;
    n->varmax = inner->varmax;
    n->inner = std::move(inner);
    return n;
}

Certificate make_branching(NodeKind kind, std::vector<CertPart> parts, const Branch& sigma)
{
    auto n = std::make_shared<CertNode>();
    n->kind = kind;
    if (kind == NodeKind::Skipped) {
        n->varmin = meet_length(sigma, parts.front().witness);
        n->varmax = meet_length(sigma, parts.back().witness);
    } else {
        n->varmin = parts.front().node->varmin;
        n->varmax = parts.back().node->varmax;
    }
    n->parts = std::move(parts);
    return n;
}

} // namespace

std::vector<Branch> certificate_leaves(const CertNode& node)
{
    std::vector<Branch> out;
    collect_leaves(node, out);
    return out;
}

std::size_t certificate_node_count(const CertNode& node)
{
    std::size_t count = 1;
    for (const auto& p : node.parts)
        if (p.node)
            count += certificate_node_count(*p.node);
    if (node.inner)
        count += certificate_node_count(*node.inner);
    return count;
}

// ------------------------------------------------------------- verifier

std::string VerifyResult::describe() const
{
    switch (status) {
    case Status::Ok:
        return "ok";
    case Status::Structural:
        return "structural mismatch: " + message;
    case Status::Clause:
        return "clause violation [" + clause + "] at " + path + ": " + message;
    }
    return "?";
}

namespace {

class Verifier {
public:
    VerifyResult run(const FamilyParams& params, const BranchSet& set, const Branch& sigma,
                     const Certificate& cert)
    {
        if (!cert)
            return structural("empty certificate");
        auto leaves = certificate_leaves(*cert);
        auto sorted = leaves;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            return structural("a branch occurs in more than one leaf");
        if (sorted != set.items())
            return structural("leaves {" + BranchSet(sorted).to_string() + "} differ from F {" +
                              set.to_string() + "}");
        node(params, sigma, *cert, "root");
        return result_;
    }

private:
    VerifyResult structural(std::string message)
    {
        VerifyResult r;
        r.status = VerifyResult::Status::Structural;
        r.message = std::move(message);
        return r;
    }

    bool fail(const std::string& clause, const std::string& path, const std::string& message)
    {
        if (result_.ok()) {
            result_.status = VerifyResult::Status::Clause;
            result_.clause = clause;
            result_.path = path;
            result_.message = message;
        }
        return false;
    }

    // Returns false after recording the first violated clause.
    bool node(const FamilyParams& level, const Branch& sigma, const CertNode& n,
              const std::string& path)
    {
        const auto leaves = certificate_leaves(n);
        if (leaves.empty())
            return fail("nonempty", path, "node has no branches");
        for (const auto& t : leaves)
            if (t == sigma)
                return fail("sigma-not-in-F", path, "witness " + sigma.to_string() +
                                                        " is a member of the set");
        const auto [lo, hi] = meet_range(leaves, sigma);
        if (n.varmin != lo || n.varmax != hi)
            return fail("varmin-varmax", path,
                        "cached varmin/varmax " + std::to_string(n.varmin) + "/" +
                            std::to_string(n.varmax) + " but meets range over " +
                            std::to_string(lo) + ".." + std::to_string(hi));

        const auto stage = level.stage();
        switch (n.kind) {
        case NodeKind::Leaf:
            return leaf(level, sigma, n, path);
        case NodeKind::Lift:
            return lift(level, sigma, n, path);
        case NodeKind::Skipped:
        case NodeKind::Attached:
            if (stage != FamilyParams::Stage::Successor)
                return fail("branching-level", path,
                            std::string(to_string(n.kind)) + " node in non-successor family " +
                                level.to_string());
            if (n.parts.empty())
                return fail("branching-nonempty", path, "branching without parts");
            return n.kind == NodeKind::Skipped ? skipped(level, sigma, n, path)
                                               : attached(level, sigma, n, path);
        }
        return fail("kind", path, "unknown node kind");
    }

    bool leaf(const FamilyParams& level, const Branch& sigma, const CertNode& n,
              const std::string& path)
    {
        if (level.stage() != FamilyParams::Stage::Base)
            return fail("leaf-level", path, "1-chain leaf in family " + level.to_string());
        if (n.chain.empty())
            return fail("leaf-nonempty", path, "empty chain");
        std::vector<std::size_t> lengths;
        for (const auto& t : n.chain)
            lengths.push_back(meet_length(sigma, t));
        if (lengths.front() == 0)
            return fail("chain-nonempty-meet", path, "sigma ^ tau_1 is empty");
        for (std::size_t i = 1; i < lengths.size(); ++i)
            if (lengths[i - 1] >= lengths[i])
                return fail("chain-increasing", path,
                            "meets with sigma are not strictly increasing at position " +
                                std::to_string(i + 1));
        if (!level.admits(lengths))
            return fail(level.regime() == FamilyParams::Regime::Plain ? "chain-cardinality"
                                                                      : "chain-schreier",
                        path, "chain of " + std::to_string(lengths.size()) +
                                  " not admissible for " + level.to_string());
        if (n.varmin != lengths.front() || n.varmax != lengths.back())
            return fail("leaf-varmin-varmax", path, "cache disagrees with chain ends");
        return true;
    }

    bool lift(const FamilyParams& level, const Branch& sigma, const CertNode& n,
              const std::string& path)
    {
        if (!n.inner || !n.lift_level)
            return fail("lift-structure", path, "lift without inner node or level");
        const auto& inner_level = *n.lift_level;
        switch (level.stage()) {
        case FamilyParams::Stage::Base:
            return fail("lift-level", path, "lift out of the base family");
        case FamilyParams::Stage::Successor:
            if (n.gate != 0 || inner_level != level.predecessor())
                return fail("lift-successor", path,
                            "successor lift must target " + level.predecessor().to_string() +
                                " with gate 0");
            break;
        case FamilyParams::Stage::Limit:
            if (n.gate == 0 || inner_level != level.limit_step(n.gate))
                return fail("lift-limit", path,
                            "limit lift must target the gate's fundamental step");
            if (n.varmin < n.gate)
                return fail("limit-gate", path,
                            "varmin " + std::to_string(n.varmin) + " below gate " +
                                std::to_string(n.gate));
            break;
        }
        if (n.varmin != n.inner->varmin || n.varmax != n.inner->varmax)
            return fail("lift-varmin-varmax", path, "cache differs from inner node");
        return node(inner_level, sigma, *n.inner, path + "/lift");
    }

    bool disjoint_parts(const CertNode& n, const std::string& path)
    {
        std::set<Branch> seen;
        for (const auto& p : n.parts) {
            if (!p.node)
                return fail("part-structure", path, "part without certificate");
            for (const auto& t : certificate_leaves(*p.node))
                if (!seen.insert(t).second)
                    return fail("parts-disjoint", path, "parts share " + t.to_string());
        }
        return true;
    }

    bool skipped(const FamilyParams& level, const Branch& sigma, const CertNode& n,
                 const std::string& path)
    {
        if (!disjoint_parts(n, path))
            return false;
        std::vector<std::size_t> meets;
        for (std::size_t i = 0; i < n.parts.size(); ++i) {
            const auto& p = n.parts[i];
            if (p.witness == sigma)
                return fail("skipped-distinct-witness", path,
                            "sigma_" + std::to_string(i + 1) + " equals sigma");
            meets.push_back(meet_length(sigma, p.witness));
        }
        if (meets.front() == 0)
            return fail("skipped-nonempty-meet", path, "sigma ^ sigma_1 is empty");
        for (std::size_t i = 1; i < meets.size(); ++i)
            if (meets[i - 1] >= meets[i])
                return fail("skipped-chain", path, "sigma ^ sigma_i not strictly increasing");
        for (std::size_t i = 0; i < n.parts.size(); ++i) {
            const auto part_leaves = certificate_leaves(*n.parts[i].node);
            const auto lo = meet_range(part_leaves, n.parts[i].witness).first;
            if (!(meets[i] < lo))
                return fail("skipped-below-varmin", path,
                            "|sigma ^ sigma_" + std::to_string(i + 1) + "| = " +
                                std::to_string(meets[i]) + " is not below varmin " +
                                std::to_string(lo));
        }
        if (!level.admits(meets))
            return fail(level.regime() == FamilyParams::Regime::Plain ? "skipped-count"
                                                                      : "skipped-schreier",
                        path, std::to_string(meets.size()) + " parts not admissible for " +
                                  level.to_string());
        if (n.varmin != meets.front() || n.varmax != meets.back())
            return fail("skipped-varmin-varmax", path, "cache disagrees with witness meets");
        const auto sub = level.predecessor();
        for (std::size_t i = 0; i < n.parts.size(); ++i)
            if (!node(sub, n.parts[i].witness, *n.parts[i].node,
                      path + "/part" + std::to_string(i + 1)))
                return false;
        return true;
    }

    bool attached(const FamilyParams& level, const Branch& sigma, const CertNode& n,
                  const std::string& path)
    {
        if (!disjoint_parts(n, path))
            return false;
        std::vector<std::size_t> mins;
        std::vector<std::size_t> maxs;
        for (std::size_t i = 0; i < n.parts.size(); ++i) {
            const auto& p = n.parts[i];
            if (p.witness != sigma)
                return fail("attached-shared-witness", path,
                            "part " + std::to_string(i + 1) + " does not use sigma");
            const auto [lo, hi] = meet_range(certificate_leaves(*p.node), sigma);
            mins.push_back(lo);
            maxs.push_back(hi);
        }
        for (std::size_t i = 0; i + 1 < n.parts.size(); ++i)
            if (!(maxs[i] < mins[i + 1]))
                return fail("attached-separation", path,
                            "varmax(F_" + std::to_string(i + 1) + ") = " +
                                std::to_string(maxs[i]) + " is not below varmin(F_" +
                                std::to_string(i + 2) + ") = " + std::to_string(mins[i + 1]));
        if (!level.admits(mins))
            return fail(level.regime() == FamilyParams::Regime::Plain ? "attached-count"
                                                                      : "attached-schreier",
                        path, std::to_string(mins.size()) + " parts not admissible for " +
                                  level.to_string());
        if (n.varmin != mins.front() || n.varmax != maxs.back())
            return fail("attached-varmin-varmax", path, "cache disagrees with parts");
        const auto sub = level.predecessor();
        for (std::size_t i = 0; i < n.parts.size(); ++i)
            if (!node(sub, sigma, *n.parts[i].node, path + "/part" + std::to_string(i + 1)))
                return false;
        return true;
    }

    VerifyResult result_;
};

} // namespace

VerifyResult verify_certificate(const FamilyParams& params, const BranchSet& set,
                                const Branch& sigma, const Certificate& cert)
{
    return Verifier{}.run(params, set, sigma, cert);
}

// ------------------------------------------------------------ candidates

namespace {

std::vector<Branch> exit_candidates(const std::vector<const Branch*>& members,
                                    std::size_t min_depth, bool deep)
{
    std::vector<Branch> out;
    if (members.empty())
        return out;
    std::size_t max_depth = std::max<std::size_t>(min_depth, 1);
    if (members.size() >= 2) {
        std::size_t widest = 0;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j)
                widest = std::max(widest, meet_length(*members[i], *members[j]));
        max_depth = std::max(max_depth, widest + 1);
    }
    if (deep)
        for (const auto* t : members)
            max_depth = std::max(max_depth, t->word().size() + 1);

    std::set<Branch> seen;
    for (const auto* t : members) {
        for (std::size_t h = min_depth; h <= max_depth; ++h) {
            // Leaving t at depth h is an exit of the prefix tree iff no other
            // member turns off t exactly there.
            bool blocked = false;
            for (const auto* u : members)
                if (u != t && meet_length(*t, *u) == h) {
                    blocked = true;
                    break;
                }
            if (blocked)
                continue;
            Branch b = branch_through(t->prefix(h), !t->bit(h), false);
            if (seen.insert(b).second)
                out.push_back(std::move(b));
        }
    }
    return out;
}

} // namespace

std::vector<Branch> candidate_witnesses(const BranchSet& set, std::size_t min_depth, bool deep)
{
    std::vector<const Branch*> members;
    for (const auto& b : set)
        members.push_back(&b);
    return exit_candidates(members, min_depth, deep);
}

// ---------------------------------------------------------------- solver

struct MembershipSolver::Impl {
    BranchSet universe;
    SearchLimits limits;
    std::map<FamilyParams, int> level_ids;
    std::vector<FamilyParams> levels;

    using MemberKey = std::tuple<int, Mask, std::vector<std::size_t>>;
    std::map<MemberKey, Certificate> member_memo;
    using ConeKey = std::tuple<int, Mask, std::size_t>;
    std::map<ConeKey, std::optional<std::pair<Branch, Certificate>>> cone_memo;
    std::map<std::pair<int, Mask>, std::optional<std::pair<Branch, Certificate>>> any_memo;

    int level_id(const FamilyParams& p)
    {
        auto [it, inserted] = level_ids.emplace(p, static_cast<int>(levels.size()));
        if (inserted)
            levels.push_back(p);
        return it->second;
    }

    std::vector<int> indices(Mask mask) const
    {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(universe.size()); ++i)
            if (mask >> i & 1u)
                out.push_back(i);
        return out;
    }

    std::vector<const Branch*> members(Mask mask) const
    {
        std::vector<const Branch*> out;
        for (int i : indices(mask))
            out.push_back(&universe[static_cast<std::size_t>(i)]);
        return out;
    }

    // Level sets of |sigma ^ tau| over the mask, in increasing length.
    struct Classes {
        std::vector<std::size_t> lengths;
        std::vector<Mask> masks;
    };

    Classes classes(Mask mask, const std::vector<std::size_t>& profile) const
    {
        std::map<std::size_t, Mask> by_length;
        const auto idx = indices(mask);
        for (std::size_t k = 0; k < idx.size(); ++k)
            by_length[profile[k]] |= Mask{1} << idx[k];
        Classes c;
        for (const auto& [len, m] : by_length) {
            c.lengths.push_back(len);
            c.masks.push_back(m);
        }
        return c;
    }

    Certificate member(int level, Mask mask, const Branch& sigma)
    {
        std::vector<std::size_t> profile;
        for (int i : indices(mask)) {
            const auto l = meet_length(sigma, universe[static_cast<std::size_t>(i)]);
            if (l == kInfiniteMeet)
                return nullptr;
            profile.push_back(l);
        }
        MemberKey key{level, mask, profile};
        if (auto it = member_memo.find(key); it != member_memo.end())
            return it->second;
        auto r = member_uncached(level, mask, sigma, profile);
        member_memo.emplace(std::move(key), r);
        return r;
    }

    Certificate member_uncached(int level, Mask mask, const Branch& sigma,
                                const std::vector<std::size_t>& profile)
    {
        const FamilyParams params = levels[static_cast<std::size_t>(level)];
        const auto cls = classes(mask, profile);
        const auto lowest = cls.lengths.front();
        if (lowest == 0)
            return nullptr; // every derivation has varmin >= 1

        switch (params.stage()) {
        case FamilyParams::Stage::Base: {
            if (cls.lengths.size() != profile.size())
                return nullptr; // meets must be pairwise distinct
            if (!params.admits(cls.lengths))
                return nullptr;
            std::vector<Branch> chain;
            for (Mask m : cls.masks)
                chain.push_back(universe[static_cast<std::size_t>(__builtin_ctz(m))]);
            return make_leaf(std::move(chain), cls.lengths.front(), cls.lengths.back());
        }
        case FamilyParams::Stage::Limit: {
            for (std::uint64_t n = 1; n <= lowest; ++n) {
                const auto step = params.limit_step(n);
                if (auto inner = member(level_id(step), mask, sigma))
                    return make_lift(step, n, inner);
            }
            return nullptr;
        }
        case FamilyParams::Stage::Successor:
            break;
        }

        const auto pred = params.predecessor();
        const int pred_id = level_id(pred);
        if (auto inner = member(pred_id, mask, sigma))
            return make_lift(pred, 0, inner);
        if (auto s = skipped(params, pred_id, cls, sigma))
            return s;
        return attached(params, pred_id, cls, sigma);
    }

    // In a skipped branching every part is one level set of |sigma ^ tau|,
    // lying in the cone sigma|L ^ (flipped bit) where its own witness lives.
    Certificate skipped(const FamilyParams& params, int pred_id, const Classes& cls,
                        const Branch& sigma)
    {
        if (!params.admits(cls.lengths))
            return nullptr;
        std::vector<CertPart> parts;
        for (std::size_t i = 0; i < cls.masks.size(); ++i) {
            auto found = cone(pred_id, cls.masks[i], cls.lengths[i] + 1);
            if (!found)
                return nullptr;
            parts.push_back(CertPart{found->first, found->second});
        }
        return make_branching(NodeKind::Skipped, std::move(parts), sigma);
    }

    // Attached parts are runs of consecutive level sets.
    Certificate attached(const FamilyParams& params, int pred_id, const Classes& cls,
                         const Branch& sigma)
    {
        const auto k = cls.masks.size();
        if (k < 2)
            return nullptr;
        std::vector<std::size_t> firsts;
        std::vector<CertPart> parts;
        auto split = [&](auto&& self, std::size_t start) -> bool {
            if (start == k)
                return parts.size() >= 2;
            for (std::size_t stop = k; stop > start; --stop) {
                if (start == 0 && stop == k)
                    continue; // a single part is the inclusion already tried
                firsts.push_back(cls.lengths[start]);
                if (params.admits(firsts)) {
                    Mask group = 0;
                    for (std::size_t c = start; c < stop; ++c)
                        group |= cls.masks[c];
                    if (auto inner = member(pred_id, group, sigma)) {
                        parts.push_back(CertPart{sigma, inner});
                        if (self(self, stop))
                            return true;
                        parts.pop_back();
                    }
                }
                firsts.pop_back();
            }
            return false;
        };
        if (!split(split, 0))
            return nullptr;
        return make_branching(NodeKind::Attached, std::move(parts), sigma);
    }

    std::optional<std::pair<Branch, Certificate>> cone(int level, Mask mask, std::size_t depth)
    {
        ConeKey key{level, mask, depth};
        if (auto it = cone_memo.find(key); it != cone_memo.end())
            return it->second;
        std::optional<std::pair<Branch, Certificate>> found;
        for (const auto& candidate : exit_candidates(members(mask), depth, false)) {
            if (auto c = member(level, mask, candidate)) {
                found.emplace(candidate, c);
                break;
            }
        }
        cone_memo.emplace(key, found);
        return found;
    }

    std::optional<std::pair<Branch, Certificate>> any(int level, Mask mask)
    {
        auto key = std::make_pair(level, mask);
        if (auto it = any_memo.find(key); it != any_memo.end())
            return it->second;
        std::optional<std::pair<Branch, Certificate>> found;
        for (const auto& candidate : exit_candidates(members(mask), 0, false)) {
            if (auto c = member(level, mask, candidate)) {
                found.emplace(candidate, c);
                break;
            }
        }
        any_memo.emplace(key, found);
        return found;
    }
};

MembershipSolver::MembershipSolver(BranchSet universe, SearchLimits limits)
    : impl_(std::make_unique<Impl>())
{
    if (universe.size() > limits.max_family)
        throw CapExceeded("family of " + std::to_string(universe.size()) +
                          " branches exceeds cap " + std::to_string(limits.max_family));
    if (universe.size() > 31)
        throw CapExceeded("membership solver supports at most 31 branches");
    impl_->universe = std::move(universe);
    impl_->limits = limits;
}

MembershipSolver::~MembershipSolver() = default;
MembershipSolver::MembershipSolver(MembershipSolver&&) noexcept = default;
MembershipSolver& MembershipSolver::operator=(MembershipSolver&&) noexcept = default;

const BranchSet& MembershipSolver::universe() const noexcept
{
    return impl_->universe;
}

MembershipSolver::Mask MembershipSolver::full_mask() const noexcept
{
    return static_cast<Mask>((std::uint64_t{1} << impl_->universe.size()) - 1);
}

BranchSet MembershipSolver::subset(Mask mask) const
{
    std::vector<Branch> out;
    for (int i : impl_->indices(mask))
        out.push_back(impl_->universe[static_cast<std::size_t>(i)]);
    return BranchSet(std::move(out));
}

MembershipSolver::Mask MembershipSolver::mask_of(const BranchSet& set) const
{
    Mask m = 0;
    const auto& u = impl_->universe.items();
    for (const auto& b : set) {
        auto it = std::lower_bound(u.begin(), u.end(), b);
        if (it == u.end() || *it != b)
            throw std::invalid_argument("branch " + b.to_string() + " not in solver universe");
        m |= Mask{1} << (it - u.begin());
    }
    return m;
}

std::optional<Certificate> MembershipSolver::decide(const FamilyParams& params, Mask mask,
                                                    const Branch& sigma)
{
    if (mask == 0)
        throw std::invalid_argument("membership of the empty set is not a pair question");
    for (int i : impl_->indices(mask))
        if (impl_->universe[static_cast<std::size_t>(i)] == sigma)
            throw std::invalid_argument("sigma " + sigma.to_string() + " belongs to F");
    auto c = impl_->member(impl_->level_id(params), mask, sigma);
    if (!c)
        return std::nullopt;
    return c;
}

std::optional<std::pair<Branch, Certificate>> MembershipSolver::decide_any(const FamilyParams& params,
                                                                           Mask mask)
{
    if (mask == 0)
        throw std::invalid_argument("membership of the empty set is not a pair question");
    return impl_->any(impl_->level_id(params), mask);
}

std::optional<Certificate> decide_membership(const FamilyParams& params, const BranchSet& set,
                                             const Branch& sigma, const SearchLimits& limits)
{
    if (set.contains(sigma))
        throw std::invalid_argument("sigma " + sigma.to_string() + " belongs to F");
    MembershipSolver solver(set, limits);
    return solver.decide(params, solver.full_mask(), sigma);
}

std::optional<std::pair<Branch, Certificate>>
decide_membership_any_sigma(const FamilyParams& params, const BranchSet& set,
                            const SearchLimits& limits)
{
    if (set.empty())
        throw std::invalid_argument("decide_membership_any_sigma needs a nonempty set");
    MembershipSolver solver(set, limits);
    return solver.decide_any(params, solver.full_mask());
}

// --------------------------------------------------- restriction, minimum

namespace {

Certificate restrict_node(const CertNode& n, const Branch& sigma, const BranchSet& keep)
{
    switch (n.kind) {
    case NodeKind::Leaf: {
        std::vector<Branch> chain;
        for (const auto& t : n.chain)
            if (keep.contains(t))
                chain.push_back(t);
        if (chain.empty())
            return nullptr;
        const auto lo = meet_length(sigma, chain.front());
        const auto hi = meet_length(sigma, chain.back());
        return make_leaf(std::move(chain), lo, hi);
    }
    case NodeKind::Lift: {
        auto inner = restrict_node(*n.inner, sigma, keep);
        if (!inner)
            return nullptr;
        return make_lift(*n.lift_level, n.gate, inner);
    }
    case NodeKind::Skipped:
    case NodeKind::Attached: {
        std::vector<CertPart> parts;
        for (const auto& p : n.parts) {
            const auto& part_sigma = n.kind == NodeKind::Skipped ? p.witness : sigma;
            if (auto r = restrict_node(*p.node, part_sigma, keep))
                parts.push_back(CertPart{p.witness, r});
        }
        if (parts.empty())
            return nullptr;
        return make_branching(n.kind, std::move(parts), sigma);
    }
    }
    return nullptr;
}

void require_valid(const FamilyParams& params, const BranchSet& set, const Branch& sigma,
                   const Certificate& cert, const char* op)
{
    const auto v = verify_certificate(params, set, sigma, cert);
    if (!v)
        throw std::invalid_argument(std::string(op) + ": invalid input certificate (" +
                                    v.describe() + ")");
}

// Follows the inductive construction: only a lone skipped part or a lone
// attached part changes the witness; any branching with two or more parts
// already has varmin equal to the smallest pairwise meet.
std::pair<Branch, Certificate> minimize_node(const FamilyParams& level, const Branch& sigma,
                                             const Certificate& node)
{
    switch (node->kind) {
    case NodeKind::Leaf:
        return {sigma, node};
    case NodeKind::Lift: {
        auto [s, inner] = minimize_node(*node->lift_level, sigma, node->inner);
        return {s, make_lift(*node->lift_level, node->gate, inner)};
    }
    case NodeKind::Skipped:
    case NodeKind::Attached:
        if (node->parts.size() >= 2)
            return {sigma, node};
        {
            const auto pred = level.predecessor();
            const auto& part = node->parts.front();
            const auto& part_sigma = node->kind == NodeKind::Skipped ? part.witness : sigma;
            auto [s, inner] = minimize_node(pred, part_sigma, part.node);
            return {s, make_lift(pred, 0, inner)};
        }
    }
    return {sigma, node};
}

} // namespace

Certificate restrict_certificate(const FamilyParams& params, const BranchSet& set,
                                 const Branch& sigma, const Certificate& cert,
                                 const BranchSet& subset)
{
    require_valid(params, set, sigma, cert, "restrict_certificate");
    if (subset.empty())
        throw std::invalid_argument("restrict_certificate: subset must be nonempty");
    for (const auto& b : subset)
        if (!set.contains(b))
            throw std::invalid_argument("restrict_certificate: " + b.to_string() +
                                        " is not in F");
    return restrict_node(*cert, sigma, subset);
}

std::pair<Branch, Certificate> minimize_witness(const FamilyParams& params, const BranchSet& set,
                                                const Branch& sigma, const Certificate& cert)
{
    if (set.size() < 2)
        throw std::invalid_argument("minimize_witness: F needs at least two branches");
    require_valid(params, set, sigma, cert, "minimize_witness");
    const auto target = set.min_pairwise_meet();
    if (cert->varmin > target)
        throw std::logic_error("minimize_witness: varmin exceeds the smallest pairwise meet");
    auto out = minimize_node(params, sigma, cert);
    if (out.second->varmin != target)
        throw std::logic_error("minimize_witness: construction did not reach the minimum");
    return out;
}

// ------------------------------------------------------------------- phi

BranchSet PhiWitness::image(const FinSet& set) const
{
    std::vector<Branch> out;
    for (auto k : set) {
        if (k == 0 || k > tau.size())
            throw std::out_of_range("phi is defined on 1.." + std::to_string(tau.size()));
        out.push_back(tau[k - 1]);
    }
    return BranchSet(std::move(out));
}

BranchStream canonical_stream()
{
    auto k = std::make_shared<std::size_t>(0);
    return [k]() {
        ++*k;
        return Branch(std::string(*k, '0') + '1', false);
    };
}

namespace {

std::optional<PhiWitness> greedy_phi(const std::vector<Branch>& pool, const FamilyParams& params,
                                     std::size_t m)
{
    PhiWitness w;
    w.params = params;
    std::vector<const Branch*> live;
    for (const auto& b : pool)
        live.push_back(&b);
    Node at;
    while (w.tau.size() < m) {
        if (live.empty())
            return std::nullopt;
        const auto depth = at.length();
        if (live.size() == 1) {
            if (w.tau.size() + 1 != m)
                return std::nullopt;
            const auto& last = *live.front();
            const auto h = std::max<std::size_t>(depth, 1);
            w.tau.push_back(last);
            w.sigma = branch_through(last.prefix(h), !last.bit(h));
            return w;
        }
        std::vector<const Branch*> zeros;
        std::vector<const Branch*> ones;
        for (const auto* b : live)
            (b->bit(depth) ? ones : zeros).push_back(b);
        const bool go_one = ones.size() > zeros.size();
        auto& stay = go_one ? ones : zeros;
        auto& leave = go_one ? zeros : ones;
        if (depth >= 1 && !leave.empty())
            w.tau.push_back(*leave.front());
        at.word.push_back(go_one ? '1' : '0');
        live = std::move(stay);
    }
    w.sigma = Branch(at.word, false);
    return w;
}

} // namespace

PhiWitness build_phi(const BranchStream& stream, const FamilyParams& params, std::size_t m,
                     std::size_t probe_budget)
{
    if (m == 0)
        throw std::invalid_argument("build_phi: m must be positive");
    std::vector<Branch> pool;
    std::set<Branch> seen;
    std::size_t probes = 0;
    std::size_t target = std::max<std::size_t>(2 * m, 8);
    while (true) {
        while (pool.size() < target && probes < probe_budget) {
            ++probes;
            Branch b = stream();
            if (seen.insert(b).second)
                pool.push_back(std::move(b));
        }
        if (auto w = greedy_phi(pool, params, m))
            return *w;
        if (probes >= probe_budget)
            throw std::runtime_error("build_phi: probe budget of " + std::to_string(probe_budget) +
                                     " exhausted before " + std::to_string(m) +
                                     " branches with increasing meets were found");
        target *= 2;
    }
}

PhiCheck check_phi(const PhiWitness& w)
{
    PhiCheck out;
    const auto m = w.tau.size();
    std::vector<std::size_t> meets;
    for (std::size_t k = 0; k < m; ++k) {
        const auto l = meet_length(w.sigma, w.tau[k]);
        if (l == kInfiniteMeet) {
            out.ok = false;
            out.reason = "sigma equals tau_" + std::to_string(k + 1);
            return out;
        }
        if (!meets.empty() && meets.back() >= l) {
            out.ok = false;
            out.reason = "meets with sigma not strictly increasing at k = " + std::to_string(k + 1);
            return out;
        }
        meets.push_back(l);
    }
    if (m == 0)
        return out;

    std::vector<std::uint64_t> all(m);
    for (std::size_t k = 0; k < m; ++k)
        all[k] = k + 1;
    const FinSet universe(all);
    std::vector<FinSet> sets;
    if (w.params.regime() == FamilyParams::Regime::Plain) {
        sets = schreier_enumerate(w.params.alpha(), universe);
    } else {
        sets = enumerate_hereditary(universe, [&](const FinSet& s) {
            return schreier_iterated_member(w.params.alpha(), w.params.level(), s);
        });
    }

    SearchLimits limits;
    limits.max_family = std::max(limits.max_family, m);
    MembershipSolver solver(BranchSet(w.tau), limits);
    for (const auto& f : sets) {
        if (f.empty())
            continue;
        ++out.sets_checked;
        const auto image = w.image(f);
        auto cert = solver.decide(w.params, solver.mask_of(image), w.sigma);
        if (!cert) {
            out.ok = false;
            out.failing = f;
            out.reason = "phi(" + f.to_string() + ") is not a member with sigma";
            return out;
        }
        if ((*cert)->varmin != meets[f.min() - 1] || (*cert)->varmax != meets[f.max() - 1]) {
            out.ok = false;
            out.failing = f;
            out.reason = "varmin/varmax of phi(" + f.to_string() + ") not at min/max of F";
            return out;
        }
    }
    return out;
}

} // namespace gfam
