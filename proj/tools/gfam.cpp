#include "gfam/certificate_io.hpp"
#include "gfam/certify.hpp"
#include "gfam/errors.hpp"
#include "gfam/families.hpp"
#include "gfam/norms.hpp"
#include "gfam/ordinal.hpp"
#include "gfam/random.hpp"
#include "gfam/rational.hpp"
#include "gfam/schreier.hpp"

#include "../tests/acceptance/suite.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gfam;

namespace {

// Exit codes: 0 true/ok, 1 false/absent/inconclusive, 2 bad input.
constexpr int kTrue = 0;
constexpr int kFalse = 1;
constexpr int kInput = 2;

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!(out << text))
        throw InputError("cannot write '" + path + "'");
}

// Parse a whole file, reporting errors against the file's name.
template <class T, class Fn>
T parse_file(const std::string& path, Fn&& parse)
{
    const auto text = read_file(path);
    try {
        return parse(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.message(), e.input(), e.position());
    }
}

Vector load_vector(const std::string& path)
{
    return parse_file<Vector>(path, [](const std::string& t) { return Vector::parse(t); });
}

SeqVector load_seqvector(const std::string& path)
{
    return parse_file<SeqVector>(path, [](const std::string& t) { return SeqVector::parse(t); });
}

CertificateFile load_certificate(const std::string& path, std::size_t max_depth)
{
    return parse_file<CertificateFile>(
        path, [&](const std::string& t) { return read_certificate(t, max_depth); });
}

// Sequence file: one vector path per line, relative to the sequence file.
BlockSequence load_sequence(const std::string& path)
{
    const auto text = read_file(path);
    const auto base = fs::path(path).parent_path();
    std::vector<Vector> vectors;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        const auto e = line.find_last_not_of(" \t\r");
        fs::path p = line.substr(b, e - b + 1);
        if (p.is_relative())
            p = base / p;
        vectors.push_back(load_vector(p.string()));
    }
    return BlockSequence(std::move(vectors));
}

void report_parse_error(const ParseError& e)
{
    std::cerr << "error: " << e.what() << '\n';
    const auto& in = e.input();
    const auto pos = std::min(e.position(), in.size());
    const auto nl = pos == 0 ? std::string::npos : in.rfind('\n', pos - 1);
    const auto start = nl == std::string::npos ? 0 : nl + 1;
    auto end = in.find('\n', start);
    if (end == std::string::npos)
        end = in.size();
    std::cerr << "  " << in.substr(start, end - start) << '\n'
              << "  " << std::string(pos - start, ' ') << "^\n";
}

std::string meet_text(const Branch& a, const Branch& b)
{
    const auto m = meet(a, b);
    if (m.infinite())
        return "node=" + a.to_string() + " len=inf";
    return "node=" + m.node->to_string() + " len=" + std::to_string(m.length);
}

// ---------------------------------------------------------------- generators

Branch random_branch(SplitMix64& rng, std::uint64_t depth)
{
    const auto len = rng.below(depth + 1);
    std::string word;
    for (std::uint64_t i = 0; i < len; ++i)
        word += rng.below(2) ? '1' : '0';
    const bool tail = rng.below(2) == 1;
    return Branch(std::move(word), tail);
}

Rational random_coefficient(SplitMix64& rng, bool positive)
{
    auto num = rng.between(1, 9);
    const auto den = rng.between(1, 8);
    if (!positive && rng.below(2))
        num = -num;
    Rational q(num, den);
    q.canonicalize();
    return q;
}

std::vector<Branch> distinct_branches(SplitMix64& rng, std::size_t count, std::uint64_t depth)
{
    std::set<Branch> seen;
    std::vector<Branch> out;
    for (std::size_t tries = 0; out.size() < count; ++tries) {
        if (tries >= 64 * count + 64)
            throw InputError("cannot draw " + std::to_string(count) +
                             " distinct branches of depth " + std::to_string(depth));
        auto b = random_branch(rng, depth);
        if (seen.insert(b).second)
            out.push_back(std::move(b));
    }
    return out;
}

// ---------------------------------------------------------------- options

struct Args {
    std::string alpha, set, universe, regime, sigma, file, subset, vec, ladder = "plain";
    std::string talpha = "1", seq, out, stream, eps = "1/10", dir, scale = "small", other;
    std::string b1, b2;
    std::uint64_t n = 1, k = 1, m = 8, seed = 1, size = 4, depth = 4, count = 3, width = 3;
    std::uint64_t max_index = 12, scan = 4, suite_seed = 20240917;
    unsigned trunc = 12;
    std::size_t cap = 20, budget = 4096, samples = 2;
    bool minimize = false, check = false, iterated = false;
};

int run(CLI::App& app, const Args& a);

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Transfinite dyadic families, Schreier sets and norms, in exact arithmetic"};
    app.require_subcommand(1);
    Args a;

    auto* sch = app.add_subcommand("schreier", "Schreier families and ordinals");
    sch->require_subcommand(1);
    auto* sc = sch->add_subcommand("check", "membership F in S_alpha");
    sc->add_option("--alpha", a.alpha)->required();
    sc->add_option("--set", a.set)->required();
    auto* se = sch->add_subcommand("enum", "all members inside a universe");
    se->add_option("--alpha", a.alpha)->required();
    se->add_option("--universe", a.universe)->required();
    se->add_option("--cap", a.cap);
    auto* sv = sch->add_subcommand("convolve", "union of at most n members (or iterated)");
    sv->add_option("--alpha", a.alpha)->required();
    sv->add_option("--n", a.n)->required();
    sv->add_option("--set", a.set)->required();
    sv->add_flag("--iterated", a.iterated, "use the iterated convolution");
    auto* ss = sch->add_subcommand("step", "k-th fundamental-sequence element");
    ss->add_option("--alpha", a.alpha)->required();
    ss->add_option("--k", a.k)->required();
    auto* sk = sch->add_subcommand("compare", "ordinal comparison");
    sk->add_option("a", a.alpha)->required();
    sk->add_option("b", a.other)->required();

    auto* mt = app.add_subcommand("meet", "common initial segment of two branches");
    mt->add_option("a", a.b1)->required();
    mt->add_option("b", a.b2)->required();

    auto* gm = app.add_subcommand("gmember", "decide (F, sigma) membership");
    gm->add_option("--regime", a.regime)->required();
    gm->add_option("--set", a.set)->required();
    gm->add_option("--sigma", a.sigma, "omit to search for a witness");
    gm->add_flag("--minimize", a.minimize, "lower varmin to the least pairwise meet");
    gm->add_option("--cap", a.cap);
    gm->add_option("--out", a.out, "also write the certificate file");

    auto* gc = app.add_subcommand("gcert", "certificate files");
    gc->require_subcommand(1);
    auto* gv = gc->add_subcommand("verify", "check every clause");
    gv->add_option("--file", a.file)->required();
    auto* gr = gc->add_subcommand("restrict", "prune to a subset");
    gr->add_option("--file", a.file)->required();
    gr->add_option("--subset", a.subset)->required();
    auto* gn = gc->add_subcommand("minimize", "witness with least varmin");
    gn->add_option("--file", a.file)->required();

    auto* ph = app.add_subcommand("phi", "largeness witness from a branch stream");
    ph->add_option("--regime", a.regime)->required();
    ph->add_option("--m", a.m)->required();
    ph->add_flag("--check", a.check, "verify every image exhaustively");
    ph->add_option("--stream", a.stream, "file of branch literals (default 0^k1+0)");
    ph->add_option("--budget", a.budget);

    auto* nm = app.add_subcommand("norm", "exact norms");
    nm->require_subcommand(1);
    auto* nx = nm->add_subcommand("xn", "single-level norm");
    nx->add_option("--level", a.regime)->required();
    nx->add_option("--vec", a.vec)->required();
    nx->add_option("--cap", a.cap);
    auto* nt = nm->add_subcommand("t", "Tsirelson-type norm of a sequence vector");
    nt->add_option("--alpha", a.alpha)->required();
    nt->add_option("--vec", a.vec)->required();
    nt->add_option("--cap", a.cap);
    auto* nc = nm->add_subcommand("composite", "enclosure of the composite norm");
    nc->add_option("--regime", a.ladder);
    nc->add_option("--talpha", a.talpha);
    nc->add_option("--trunc", a.trunc);
    nc->add_option("--vec", a.vec)->required();
    nc->add_option("--cap", a.cap);
    auto* nl = nm->add_subcommand("lambda", "enclosure of ||sum 2^-n e_n||");
    nl->add_option("--talpha", a.talpha);
    nl->add_option("--trunc", a.trunc);
    auto* np = nm->add_subcommand("pn", "2^-n ||x||_n");
    np->add_option("--regime", a.ladder);
    np->add_option("--n", a.n)->required();
    np->add_option("--vec", a.vec)->required();
    np->add_option("--cap", a.cap);
    auto* na = nm->add_subcommand("apply", "F(x)");
    na->add_option("--set", a.set)->required();
    na->add_option("--vec", a.vec)->required();

    auto* ce = app.add_subcommand("certify", "l1 lower estimates");
    ce->require_subcommand(1);
    auto* cl = ce->add_subcommand("ell1", "certificate for a block sequence");
    cl->add_option("--seq", a.seq)->required();
    cl->add_option("--n", a.n)->required();
    cl->add_option("--regime", a.ladder);
    cl->add_option("--scan", a.scan);
    cl->add_option("--trunc", a.trunc);
    cl->add_option("--samples", a.samples);
    cl->add_option("--seed", a.seed);
    cl->add_option("--out", a.out, "also write the report");
    auto* cs = ce->add_subcommand("small", "is sup |F(x)| below eps at a level");
    cs->add_option("--vec", a.vec)->required();
    cs->add_option("--level", a.regime)->required();
    cs->add_option("--eps", a.eps);
    auto* cb = ce->add_subcommand("basis", "estimate for the normalized basis along phi");
    cb->add_option("--regime", a.regime)->required();
    cb->add_option("--m", a.m)->required();
    cb->add_option("--n", a.n)->required();
    cb->add_option("--trunc", a.trunc);

    auto* ge = app.add_subcommand("gen", "reproducible fixtures (SplitMix64)");
    ge->require_subcommand(1);
    auto* gvv = ge->add_subcommand("vector", "random branch-indexed vector");
    gvv->add_option("--seed", a.seed);
    gvv->add_option("--size", a.size);
    gvv->add_option("--depth", a.depth);
    auto* gsv = ge->add_subcommand("seqvector", "random sequence vector");
    gsv->add_option("--seed", a.seed);
    gsv->add_option("--size", a.size);
    gsv->add_option("--max-index", a.max_index);
    auto* gst = ge->add_subcommand("set", "random branch set");
    gst->add_option("--seed", a.seed);
    gst->add_option("--size", a.size);
    gst->add_option("--depth", a.depth);
    auto* gbl = ge->add_subcommand("blocks", "block sequence along 0^k1+0");
    gbl->add_option("--seed", a.seed);
    gbl->add_option("--count", a.count);
    gbl->add_option("--width", a.width);
    gbl->add_option("--dir", a.dir)->required();

    auto* st = app.add_subcommand("selftest", "run the acceptance suite");
    st->add_option("--scale", a.scale)->check(CLI::IsMember({"small", "full"}));
    st->add_option("--seed", a.suite_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInput;
    }

    try {
        return run(app, a);
    } catch (const ParseError& e) {
        report_parse_error(e);
        return kInput;
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << '\n';
        return kFalse;
    }
}

namespace {

int verdict(bool v)
{
    std::cout << (v ? "true" : "false") << '\n';
    return v ? kTrue : kFalse;
}

int run_schreier(CLI::App& s, const Args& a)
{
    if (s.got_subcommand("check"))
        return verdict(schreier_member(Ordinal::parse(a.alpha), FinSet::parse(a.set)));
    if (s.got_subcommand("convolve")) {
        const auto alpha = Ordinal::parse(a.alpha);
        const auto set = FinSet::parse(a.set);
        if (a.n == 0)
            throw std::invalid_argument("--n must be at least 1");
        return verdict(a.iterated ? schreier_iterated_member(alpha, a.n, set)
                                  : schreier_convolve_member(alpha, a.n, set));
    }
    if (s.got_subcommand("enum")) {
        const auto sets = schreier_enumerate(Ordinal::parse(a.alpha), FinSet::parse(a.universe), a.cap);
        for (const auto& f : sets)
            std::cout << f.to_string() << '\n';
        std::cout << "count=" << sets.size() << '\n';
        return kTrue;
    }
    if (s.got_subcommand("step")) {
        std::cout << fundamental_step(Ordinal::parse(a.alpha), a.k).to_string() << '\n';
        return kTrue;
    }
    const auto c = cnf_compare(Ordinal::parse(a.alpha), Ordinal::parse(a.other));
    std::cout << (c < 0 ? "<" : c > 0 ? ">" : "=") << '\n';
    return kTrue;
}

int run_gmember(const Args& a)
{
    const auto params = FamilyParams::parse(a.regime);
    const auto set = BranchSet::parse(a.set);
    SearchLimits limits;
    limits.max_family = a.cap;

    CertificateFile file{params, set, {}, nullptr};
    if (!a.sigma.empty()) {
        file.sigma = Branch::parse(a.sigma);
        auto cert = decide_membership(params, set, file.sigma, limits);
        if (!cert)
            return verdict(false);
        file.cert = *cert;
    } else {
        auto found = decide_membership_any_sigma(params, set, limits);
        if (!found)
            return verdict(false);
        file.sigma = found->first;
        file.cert = found->second;
    }
    if (a.minimize && set.size() >= 2)
        std::tie(file.sigma, file.cert) = minimize_witness(params, set, file.sigma, file.cert);
    const auto text = write_certificate(file);
    if (!a.out.empty())
        write_file(a.out, text);
    std::cout << "true\n" << text;
    return kTrue;
}

int run_gcert(CLI::App& g, const Args& a)
{
    auto f = load_certificate(a.file, SearchLimits{}.max_depth);
    if (g.got_subcommand("verify")) {
        const auto r = verify_certificate(f.params, f.set, f.sigma, f.cert);
        std::cout << (r.ok() ? "ok" : "invalid " + r.describe()) << '\n';
        return r.ok() ? kTrue : kFalse;
    }
    if (g.got_subcommand("restrict")) {
        const auto subset = BranchSet::parse(a.subset);
        f.cert = restrict_certificate(f.params, f.set, f.sigma, f.cert, subset);
        f.set = subset;
    } else {
        const auto r = verify_certificate(f.params, f.set, f.sigma, f.cert);
        if (!r.ok())
            throw std::invalid_argument("input certificate: " + r.describe());
        if (f.set.size() < 2)
            throw std::invalid_argument("minimize needs at least two branches");
        std::tie(f.sigma, f.cert) = minimize_witness(f.params, f.set, f.sigma, f.cert);
    }
    std::cout << write_certificate(f);
    return kTrue;
}

BranchStream file_stream(const std::string& path, std::size_t& length)
{
    const auto text = read_file(path);
    auto items = std::make_shared<std::vector<Branch>>();
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        auto trimmed = line.substr(0, line.find('#'));
        const auto b = trimmed.find_first_not_of(" \t\r");
        if (b != std::string::npos) {
            const auto e = trimmed.find_last_not_of(" \t\r");
            try {
                items->push_back(Branch::parse(trimmed.substr(b, e - b + 1)));
            } catch (const ParseError& err) {
                throw ParseError(path + ": " + err.message(), text, offset + b + err.position());
            }
        }
        offset += line.size() + 1;
    }
    length = items->size();
    auto next = std::make_shared<std::size_t>(0);
    return [items, next, path]() {
        if (*next >= items->size())
            throw std::runtime_error("stream '" + path + "' exhausted after " +
                                     std::to_string(items->size()) + " branches");
        return (*items)[(*next)++];
    };
}

int run_phi(const Args& a)
{
    const auto params = FamilyParams::parse(a.regime);
    if (a.m == 0)
        throw std::invalid_argument("--m must be at least 1");
    // A file stream is finite, so it is probed at most once per entry.
    auto budget = a.budget;
    const auto stream = a.stream.empty() ? canonical_stream() : file_stream(a.stream, budget);
    const auto w = build_phi(stream, params, a.m, std::min(budget, a.budget));
    std::cout << "regime " << params.to_string() << '\n' << "sigma " << w.sigma.to_string() << '\n';
    for (std::size_t k = 0; k < w.tau.size(); ++k)
        std::cout << "tau " << k + 1 << ' ' << w.tau[k].to_string() << " meet="
                  << meet_length(w.sigma, w.tau[k]) << '\n';
    if (!a.check)
        return kTrue;
    const auto c = check_phi(w);
    if (c.ok) {
        std::cout << "check ok sets=" << c.sets_checked << '\n';
        return kTrue;
    }
    std::cout << "check failed set=" << (c.failing ? c.failing->to_string() : "?") << ' '
              << c.reason << '\n';
    return kFalse;
}

int run_norm(CLI::App& nm, const Args& a)
{
    if (nm.got_subcommand("xn")) {
        const auto r = norm_xn(load_vector(a.vec), FamilyParams::parse(a.regime), a.cap);
        std::cout << "norm=" << to_string(r.value) << '\n'
                  << "witness=" << r.witness.to_string() << '\n';
        return kTrue;
    }
    if (nm.got_subcommand("t")) {
        const auto r = norm_tsirelson(load_seqvector(a.vec), Ordinal::parse(a.alpha), a.cap);
        std::cout << "norm=" << to_string(r.value) << '\n' << r.tree.to_string();
        return kTrue;
    }
    if (nm.got_subcommand("composite")) {
        const auto r = norm_composite(load_vector(a.vec), Ladder::parse(a.ladder),
                                      Ordinal::parse(a.talpha), a.trunc, a.cap);
        std::cout << "lower=" << to_string(r.lower) << " upper=" << to_string(r.upper) << '\n'
                  << r.witness;
        return kTrue;
    }
    if (nm.got_subcommand("lambda")) {
        const auto r = lambda_constant(a.trunc, Ordinal::parse(a.talpha));
        std::cout << "lower=" << to_string(r.lower) << " upper=" << to_string(r.upper) << '\n';
        return kTrue;
    }
    if (nm.got_subcommand("pn")) {
        if (a.n == 0)
            throw std::invalid_argument("--n must be at least 1");
        std::cout << to_string(pn_value(load_vector(a.vec), a.n, Ladder::parse(a.ladder), a.cap))
                  << '\n';
        return kTrue;
    }
    std::cout << to_string(functional_apply(BranchSet::parse(a.set), load_vector(a.vec))) << '\n';
    return kTrue;
}

int run_certify(CLI::App& ce, const Args& a)
{
    if (ce.got_subcommand("small"))
        return verdict(small_functional_bound(load_vector(a.vec), FamilyParams::parse(a.regime),
                                              parse_rational(a.eps)));
    if (ce.got_subcommand("basis")) {
        const auto params = FamilyParams::parse(a.regime);
        const auto w = build_phi(canonical_stream(), params, a.m);
        const auto r = check_basis_estimate(w, a.n, a.trunc);
        if (r.cert) {
            std::cout << r.cert->to_string();
            return kTrue;
        }
        std::cout << "failed " << r.failure->describe() << '\n';
        return kFalse;
    }
    RefineOptions opt;
    opt.scan_levels = a.scan;
    opt.ladder = Ladder::parse(a.ladder);
    opt.certify.truncation = a.trunc;
    opt.certify.random_samples = a.samples;
    opt.certify.seed = a.seed;
    const auto report = refine_to_certificate(load_sequence(a.seq), a.n, opt);
    std::string text;
    if (report.cert)
        text = report.cert->to_string();
    else
        text = "INCONCLUSIVE\nstep " + report.step + '\n' +
               (report.tsirelson_route ? "route tsirelson\n" : "") + report.evidence;
    if (!a.out.empty())
        write_file(a.out, text);
    std::cout << text;
    return report.cert ? kTrue : kFalse;
}

int run_gen(CLI::App& ge, const Args& a)
{
    SplitMix64 rng(a.seed);
    if (ge.got_subcommand("vector")) {
        Vector v;
        for (const auto& b : distinct_branches(rng, a.size, a.depth))
            v.set(b, random_coefficient(rng, false));
        std::cout << v.to_string();
    } else if (ge.got_subcommand("seqvector")) {
        if (a.size > a.max_index)
            throw std::invalid_argument("--size exceeds --max-index");
        SeqVector v;
        while (v.support_size() < a.size) {
            const auto i = 1 + rng.below(a.max_index);
            if (v.get(i) == 0)
                v.set(i, random_coefficient(rng, false));
        }
        std::cout << v.to_string();
    } else if (ge.got_subcommand("set")) {
        std::cout << BranchSet(distinct_branches(rng, a.size, a.depth)).to_string() << '\n';
    } else {
        // Block k covers the next 1..width stream branches 0^j1+0, positive weights.
        if (a.width == 0)
            throw std::invalid_argument("--width must be at least 1");
        fs::create_directories(a.dir);
        std::string seq;
        std::uint64_t j = 1;
        for (std::uint64_t k = 1; k <= a.count; ++k) {
            Vector v;
            const auto len = 1 + rng.below(a.width);
            for (std::uint64_t i = 0; i < len; ++i, ++j)
                v.set(Branch(std::string(j, '0') + '1', false), random_coefficient(rng, true));
            const auto name = "x" + std::to_string(k) + ".txt";
            write_file((fs::path(a.dir) / name).string(), v.to_string());
            seq += name + '\n';
        }
        write_file((fs::path(a.dir) / "seq.txt").string(), seq);
        std::cout << seq;
    }
    return kTrue;
}

int run_selftest(const Args& a)
{
    acceptance::Options opt;
    opt.seed = a.suite_seed;
    opt.scale = a.scale == "full" ? acceptance::Scale::Full : acceptance::Scale::Small;
    const auto results = acceptance::run(opt);
    std::cout << acceptance::report(results);
    for (const auto& r : results)
        if (!r.pass)
            return kFalse;
    return kTrue;
}

int run(CLI::App& app, const Args& a)
{
    if (auto* s = app.get_subcommand("schreier"); s->parsed())
        return run_schreier(*s, a);
    if (app.got_subcommand("meet")) {
        std::cout << meet_text(Branch::parse(a.b1), Branch::parse(a.b2)) << '\n';
        return kTrue;
    }
    if (app.got_subcommand("gmember"))
        return run_gmember(a);
    if (auto* s = app.get_subcommand("gcert"); s->parsed())
        return run_gcert(*s, a);
    if (app.got_subcommand("phi"))
        return run_phi(a);
    if (auto* s = app.get_subcommand("norm"); s->parsed())
        return run_norm(*s, a);
    if (auto* s = app.get_subcommand("certify"); s->parsed())
        return run_certify(*s, a);
    if (auto* s = app.get_subcommand("gen"); s->parsed())
        return run_gen(*s, a);
    return run_selftest(a);
}

} // namespace
