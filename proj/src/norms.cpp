#include "gfam/norms.hpp"

#include "gfam/errors.hpp"
#include "gfam/schreier.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace gfam {

// ---------------------------------------------------------------- vectors

namespace {

struct Line {
    std::string_view text;
    std::size_t offset;
    std::size_t number;
};

std::vector<Line> content_lines(std::string_view text)
{
    std::vector<Line> out;
    std::size_t start = 0;
    std::size_t number = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        ++number;
        auto line = text.substr(start, end - start);
        std::size_t offset = start;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
            line.remove_prefix(1);
            ++offset;
        }
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
            line.remove_suffix(1);
        if (!line.empty())
            out.push_back({line, offset, number});
        if (end == text.size())
            break;
        start = end + 1;
    }
    return out;
}

// Splits `key value`; the value must be a rational literal.
std::pair<std::string_view, Rational> split_entry(std::string_view all, const Line& line,
                                                  const char* what)
{
    const auto space = line.text.find_first_of(" \t");
    if (space == std::string_view::npos)
        throw ParseError(std::string(what) + ": line " + std::to_string(line.number) +
                             ": expected '<key> <p>/<q>'",
                         std::string(all), line.offset + line.text.size());
    auto value = line.text.substr(space);
    std::size_t value_offset = line.offset + space;
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) {
        value.remove_prefix(1);
        ++value_offset;
    }
    try {
        return {line.text.substr(0, space), parse_rational(value)};
    } catch (const ParseError& e) {
        throw ParseError(std::string(what) + ": line " + std::to_string(line.number) + ": " +
                             e.message(),
                         std::string(all), value_offset + e.position());
    }
}

} // namespace

Vector Vector::parse(std::string_view text)
{
    Vector v;
    for (const auto& line : content_lines(text)) {
        auto [key, value] = split_entry(text, line, "vector");
        Branch b;
        try {
            b = Branch::parse(key);
        } catch (const ParseError& e) {
            throw ParseError("vector: line " + std::to_string(line.number) + ": " + e.message(),
                             std::string(text), line.offset + e.position());
        }
        if (v.coeffs_.count(b))
            throw ParseError("vector: line " + std::to_string(line.number) + ": repeated branch " +
                                 b.to_string(),
                             std::string(text), line.offset);
        v.set(b, value);
    }
    return v;
}

void Vector::set(const Branch& b, const Rational& value)
{
    Rational v = value;
    v.canonicalize();
    if (v == 0)
        coeffs_.erase(b);
    else
        coeffs_[b] = std::move(v);
}

Rational Vector::get(const Branch& b) const
{
    auto it = coeffs_.find(b);
    return it == coeffs_.end() ? Rational(0) : it->second;
}

BranchSet Vector::support() const
{
    std::vector<Branch> out;
    for (const auto& [b, v] : coeffs_)
        out.push_back(b);
    return BranchSet(std::move(out));
}

Rational Vector::l1() const
{
    Rational s = 0;
    for (const auto& [b, v] : coeffs_)
        s += abs(v);
    return s;
}

Rational Vector::sup() const
{
    Rational s = 0;
    for (const auto& [b, v] : coeffs_)
        s = std::max(s, abs(v));
    return s;
}

Vector& Vector::operator+=(const Vector& other)
{
    for (const auto& [b, v] : other.coeffs_)
        set(b, get(b) + v);
    return *this;
}

Vector Vector::scaled(const Rational& factor) const
{
    Vector out;
    for (const auto& [b, v] : coeffs_)
        out.set(b, v * factor);
    return out;
}

std::string Vector::to_string() const
{
    std::string out;
    for (const auto& [b, v] : coeffs_)
        out += b.to_string() + " " + gfam::to_string(v) + "\n";
    return out;
}

SeqVector SeqVector::parse(std::string_view text)
{
    SeqVector v;
    for (const auto& line : content_lines(text)) {
        auto [key, value] = split_entry(text, line, "sequence");
        std::uint64_t index = 0;
        auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
        if (ec != std::errc{} || ptr != key.data() + key.size() || index == 0)
            throw ParseError("sequence: line " + std::to_string(line.number) +
                                 ": expected a positive index",
                             std::string(text), line.offset);
        if (v.coeffs_.count(index))
            throw ParseError("sequence: line " + std::to_string(line.number) + ": repeated index",
                             std::string(text), line.offset);
        v.set(index, value);
    }
    return v;
}

void SeqVector::set(std::uint64_t index, const Rational& value)
{
    if (index == 0)
        throw std::invalid_argument("sequence indices start at 1");
    Rational v = value;
    v.canonicalize();
    if (v == 0)
        coeffs_.erase(index);
    else
        coeffs_[index] = std::move(v);
}

Rational SeqVector::get(std::uint64_t index) const
{
    auto it = coeffs_.find(index);
    return it == coeffs_.end() ? Rational(0) : it->second;
}

std::string SeqVector::to_string() const
{
    std::string out;
    for (const auto& [i, v] : coeffs_)
        out += std::to_string(i) + " " + gfam::to_string(v) + "\n";
    return out;
}

Rational functional_apply(const BranchSet& set, const Vector& x)
{
    Rational s = 0;
    for (const auto& b : set)
        s += x.get(b);
    return s;
}

// ------------------------------------------------------------ level norm

namespace {

// Heaviest member of the projection inside one sign class.
std::pair<Rational, BranchSet> best_in_class(const std::vector<std::pair<Branch, Rational>>& cls,
                                             const FamilyParams& params)
{
    if (cls.empty())
        return {Rational(0), BranchSet{}};
    std::vector<Branch> items;
    for (const auto& [b, w] : cls)
        items.push_back(b);
    SearchLimits limits;
    limits.max_family = std::max(limits.max_family, items.size());
    MembershipSolver solver(BranchSet(items), limits);

    // Heaviest first so the bound bites early.
    std::vector<std::pair<MembershipSolver::Mask, Rational>> order;
    for (const auto& [b, w] : cls)
        order.emplace_back(solver.mask_of(BranchSet{b}), w);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<Rational> suffix(order.size() + 1, Rational(0));
    for (std::size_t i = order.size(); i-- > 0;)
        suffix[i] = suffix[i + 1] + order[i].second;

    if (solver.decide_any(params, solver.full_mask()))
        return {suffix[0], solver.universe()};

    Rational best = 0;
    MembershipSolver::Mask best_mask = 0;
    auto dfs = [&](auto&& self, std::size_t i, MembershipSolver::Mask mask, const Rational& sum) {
        if (sum > best) {
            best = sum;
            best_mask = mask;
        }
        if (i == order.size() || sum + suffix[i] <= best)
            return;
        const auto with = mask | order[i].first;
        if (solver.decide_any(params, with))
            self(self, i + 1, with, sum + order[i].second);
        self(self, i + 1, mask, sum);
    };
    dfs(dfs, 0, 0, Rational(0));
    return {best, solver.subset(best_mask)};
}

} // namespace

XnNorm norm_xn(const Vector& x, const FamilyParams& params, std::size_t cap)
{
    if (x.support_size() > cap)
        throw CapExceeded("support of " + std::to_string(x.support_size()) +
                          " branches exceeds cap " + std::to_string(cap));
    std::vector<std::pair<Branch, Rational>> pos;
    std::vector<std::pair<Branch, Rational>> neg;
    for (const auto& [b, v] : x.entries())
        (v > 0 ? pos : neg).emplace_back(b, abs(v));
    auto p = best_in_class(pos, params);
    auto n = best_in_class(neg, params);
    if (n.first > p.first)
        return {n.first, n.second};
    return {p.first, p.second};
}

// ---------------------------------------------------------------- T_alpha

std::string TsirelsonTree::to_string() const
{
    std::ostringstream out;
    auto emit = [&](auto&& self, const TsirelsonTree& t, int depth) -> void {
        out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
        if (t.leaf)
            out << "COORD " << t.coordinate << " value=" << gfam::to_string(t.value) << '\n';
        else {
            out << "SPLIT [" << t.first << ".." << t.last << "] value=" << gfam::to_string(t.value)
                << '\n';
            for (const auto& c : t.children)
                self(self, c, depth + 1);
        }
    };
    emit(emit, *this, 0);
    return out.str();
}

namespace {

class TsirelsonSolver {
public:
    TsirelsonSolver(const SeqVector& x, Ordinal alpha) : alpha_(std::move(alpha))
    {
        for (const auto& [i, v] : x.entries()) {
            pos_.push_back(i);
            w_.push_back(abs(v));
        }
        const auto s = pos_.size();
        prefix_.assign(s + 1, Rational(0));
        for (std::size_t i = 0; i < s; ++i)
            prefix_[i + 1] = prefix_[i] + w_[i];
        value_.assign(s, std::vector<Rational>(s));
        split_.assign(s, std::vector<std::vector<std::size_t>>(s));
        argmax_.assign(s, std::vector<std::size_t>(s));
        for (std::size_t len = 1; len <= s; ++len)
            for (std::size_t i = 0; i + len <= s; ++i)
                solve(i, i + len - 1);
    }

    TsirelsonNorm result() const
    {
        if (pos_.empty())
            return {Rational(0), TsirelsonTree{}};
        const auto last = pos_.size() - 1;
        return {value_[0][last], tree(0, last)};
    }

private:
    Rational l1(std::size_t i, std::size_t j) const { return prefix_[j + 1] - prefix_[i]; }

    bool admissible(const std::vector<std::size_t>& starts) const
    {
        std::vector<std::uint64_t> mins;
        for (auto s : starts)
            mins.push_back(pos_[s]);
        return schreier_member(alpha_, FinSet(std::move(mins)));
    }

    void solve(std::size_t i, std::size_t j)
    {
        Rational sup = 0;
        std::size_t arg = i;
        for (std::size_t t = i; t <= j; ++t)
            if (w_[t] > sup) {
                sup = w_[t];
                arg = t;
            }
        argmax_[i][j] = arg;
        // Compare sums against twice the best value to avoid halving in the loop.
        Rational best = 2 * sup;
        std::vector<std::size_t> best_split;
        std::vector<std::size_t> starts;

        // Pieces run from one start to just before the next; the last ends at j.
        // Dropping coordinates never helps except ahead of the first start.
        auto dfs = [&](auto&& self, const Rational& closed) -> void {
            const auto last = starts.back();
            if (closed + l1(last, j) <= best)
                return;
            if (starts.size() >= 2) {
                const auto total = closed + value_[last][j];
                if (total > best) {
                    best = total;
                    best_split = starts;
                }
            }
            for (std::size_t t = last + 1; t <= j; ++t) {
                starts.push_back(t);
                if (admissible(starts))
                    self(self, closed + value_[last][t - 1]);
                starts.pop_back();
            }
        };
        for (std::size_t first = i; first < j; ++first) {
            starts.assign(1, first);
            if (admissible(starts))
                dfs(dfs, Rational(0));
        }
        value_[i][j] = best_split.empty() ? sup : Rational(best / 2);
        split_[i][j] = std::move(best_split);
    }

    TsirelsonTree tree(std::size_t i, std::size_t j) const
    {
        TsirelsonTree t;
        t.first = pos_[i];
        t.last = pos_[j];
        t.value = value_[i][j];
        const auto& starts = split_[i][j];
        if (starts.empty()) {
            t.leaf = true;
            t.coordinate = pos_[argmax_[i][j]];
            return t;
        }
        t.leaf = false;
        for (std::size_t k = 0; k < starts.size(); ++k) {
            const auto end = k + 1 < starts.size() ? starts[k + 1] - 1 : j;
            t.children.push_back(tree(starts[k], end));
        }
        return t;
    }

    Ordinal alpha_;
    std::vector<std::uint64_t> pos_;
    std::vector<Rational> w_;
    std::vector<Rational> prefix_;
    std::vector<std::vector<Rational>> value_;
    std::vector<std::vector<std::vector<std::size_t>>> split_;
    std::vector<std::vector<std::size_t>> argmax_;
};

} // namespace

TsirelsonNorm norm_tsirelson(const SeqVector& x, const Ordinal& alpha, std::size_t cap)
{
    if (alpha.is_zero())
        throw std::invalid_argument("Tsirelson index must be at least 1");
    if (x.support_size() > cap)
        throw CapExceeded("support of " + std::to_string(x.support_size()) +
                          " coordinates exceeds cap " + std::to_string(cap));
    return TsirelsonSolver(x, alpha).result();
}

Rational evaluate_tsirelson_tree(const TsirelsonTree& tree, const SeqVector& x,
                                 const Ordinal& alpha)
{
    if (tree.first > tree.last)
        throw std::invalid_argument("tree interval is empty");
    if (tree.leaf) {
        if (tree.coordinate < tree.first || tree.coordinate > tree.last)
            throw std::invalid_argument("leaf coordinate outside its interval");
        return abs(x.get(tree.coordinate));
    }
    if (tree.children.size() < 2)
        throw std::invalid_argument("split with fewer than two pieces");
    std::vector<std::uint64_t> mins;
    Rational sum = 0;
    for (std::size_t k = 0; k < tree.children.size(); ++k) {
        const auto& c = tree.children[k];
        if (c.first < tree.first || c.last > tree.last)
            throw std::invalid_argument("piece outside its parent interval");
        if (k > 0 && tree.children[k - 1].last >= c.first)
            throw std::invalid_argument("pieces are not successive");
        mins.push_back(c.first);
        sum += evaluate_tsirelson_tree(c, x, alpha);
    }
    if (!schreier_member(alpha, FinSet(mins)))
        throw std::invalid_argument("piece minima " + FinSet(mins).to_string() +
                                    " not admissible");
    return sum / 2;
}

// -------------------------------------------------------------- composite

NormEnclosure lambda_constant(unsigned truncation, const Ordinal& t_alpha)
{
    if (truncation == 0)
        throw std::invalid_argument("truncation must be positive");
    SeqVector y;
    for (unsigned n = 1; n <= truncation; ++n)
        y.set(n, pow2_inv(n));
    auto t = norm_tsirelson(y, t_alpha);
    NormEnclosure e;
    e.lower = t.value;
    e.upper = t.value + pow2_inv(truncation);
    e.witness = t.tree.to_string();
    return e;
}

Ladder Ladder::parse(std::string_view text)
{
    if (text == "plain")
        return plain();
    constexpr std::string_view prefix = "schreier:";
    if (text.substr(0, prefix.size()) == prefix) {
        Ordinal a;
        try {
            a = Ordinal::parse(text.substr(prefix.size()));
        } catch (const ParseError& e) {
            throw ParseError("regime: " + e.message(), std::string(text),
                             prefix.size() + e.position());
        }
        if (a.is_zero())
            throw ParseError("regime: index must be at least 1", std::string(text),
                             prefix.size());
        return schreier(a);
    }
    throw ParseError("regime: expected 'plain' or 'schreier:<ordinal>'", std::string(text), 0);
}

FamilyParams Ladder::level(std::uint64_t n) const
{
    if (regime == FamilyParams::Regime::Plain)
        return FamilyParams::plain(n);
    return FamilyParams::schreier(alpha, n);
}

std::string Ladder::to_string() const
{
    return regime == FamilyParams::Regime::Plain ? "plain" : "schreier:" + alpha.to_string();
}

std::vector<XnNorm> level_norms(const Vector& x, const Ladder& ladder, unsigned truncation,
                                std::size_t cap)
{
    if (x.support_size() > cap)
        throw CapExceeded("support of " + std::to_string(x.support_size()) +
                          " branches exceeds cap " + std::to_string(cap));
    Rational pos = 0;
    Rational neg = 0;
    for (const auto& [b, v] : x.entries())
        (v > 0 ? pos : neg) += abs(v);
    const auto ceiling = std::max(pos, neg);
    // Levels increase, so a level that reaches the sign-class ceiling fixes all later ones.
    std::vector<XnNorm> out;
    for (unsigned n = 1; n <= truncation; ++n) {
        if (!out.empty() && out.back().value == ceiling)
            out.push_back(out.back());
        else
            out.push_back(norm_xn(x, ladder.level(n), cap));
    }
    return out;
}

NormEnclosure norm_composite(const Vector& x, const Ladder& ladder, const Ordinal& t_alpha,
                             unsigned truncation, std::size_t cap)
{
    if (truncation == 0)
        throw std::invalid_argument("truncation must be positive");
    NormEnclosure e;
    if (x.zero()) {
        e.lower = 0;
        e.upper = 0;
        e.witness = "zero vector\n";
        return e;
    }
    const auto levels = level_norms(x, ladder, truncation, cap);
    SeqVector y;
    for (unsigned n = 1; n <= truncation; ++n)
        y.set(n, pow2_inv(n) * levels[n - 1].value);
    auto t = norm_tsirelson(y, t_alpha);
    e.lower = t.value;
    e.upper = t.value + pow2_inv(truncation) * x.l1();
    std::ostringstream w;
    w << t.tree.to_string();
    for (unsigned n = 1; n <= truncation; ++n)
        w << "LEVEL " << n << " norm=" << to_string(levels[n - 1].value) << " F={"
          << levels[n - 1].witness.to_string() << "}\n";
    e.witness = w.str();
    return e;
}

Rational pn_value(const Vector& x, std::uint64_t n, const Ladder& ladder, std::size_t cap)
{
    if (n == 0 || n > 64)
        throw std::invalid_argument("level must be in 1..64");
    if (x.zero())
        return 0;
    return pow2_inv(static_cast<unsigned>(n)) * norm_xn(x, ladder.level(n), cap).value;
}

} // namespace gfam
