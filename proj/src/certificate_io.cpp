#include "gfam/certificate_io.hpp"

#include "gfam/errors.hpp"

#include <charconv>
#include <sstream>

namespace gfam {

namespace {

std::string pad(int depth)
{
    return std::string(static_cast<std::size_t>(depth) * 2, ' ');
}

std::string range(const CertNode& n)
{
    return "varmin=" + std::to_string(n.varmin) + " varmax=" + std::to_string(n.varmax);
}

void dump(const CertNode& n, int depth, std::ostringstream& out)
{
    out << pad(depth) << to_string(n.kind);
    if (n.kind == NodeKind::Lift)
        out << " level=" << n.lift_level->to_string() << " gate=" << n.gate;
    out << ' ' << range(n) << '\n';
    switch (n.kind) {
    case NodeKind::Leaf:
        for (const auto& b : n.chain)
            out << pad(depth + 1) << b.to_string() << '\n';
        break;
    case NodeKind::Skipped:
    case NodeKind::Attached:
        for (const auto& p : n.parts) {
            out << pad(depth + 1) << "PART sigma=" << p.witness.to_string() << '\n';
            dump(*p.node, depth + 2, out);
        }
        break;
    case NodeKind::Lift:
        dump(*n.inner, depth + 1, out);
        break;
    }
}

struct Line {
    std::size_t offset; // of the first non-space character
    std::size_t number;
    int depth;
    std::string_view text;
};

class Reader {
public:
    Reader(std::string_view text, std::size_t max_depth) : all_(text), max_depth_(max_depth)
    {
        std::size_t start = 0;
        std::size_t number = 0;
        while (start < text.size()) {
            auto end = text.find('\n', start);
            if (end == std::string_view::npos)
                end = text.size();
            ++number;
            auto line = text.substr(start, end - start);
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            std::size_t spaces = 0;
            while (spaces < line.size() && line[spaces] == ' ')
                ++spaces;
            auto body = line.substr(spaces);
            if (!body.empty() && body.front() != '#') {
                if (spaces % 2 != 0)
                    fail_at(start + spaces, number, "indentation must be a multiple of two");
                lines_.push_back({start + spaces, number, static_cast<int>(spaces / 2), body});
            }
            start = end + 1;
        }
    }

    CertificateFile read()
    {
        CertificateFile f;
        f.params = header<FamilyParams>("regime", [](std::string_view v) { return FamilyParams::parse(v); });
        f.sigma = header<Branch>("sigma", [](std::string_view v) { return Branch::parse(v); });
        f.set = header<BranchSet>("set", [](std::string_view v) { return BranchSet::parse(v); });
        if (at_ >= lines_.size())
            fail_at(all_.size(), lines_.empty() ? 1 : lines_.back().number + 1,
                    "missing certificate body");
        f.cert = node(0);
        if (at_ < lines_.size())
            fail(lines_[at_], "unexpected line after the certificate");
        return f;
    }

private:
    template <class T, class Parse>
    T header(std::string_view key, Parse parse)
    {
        if (at_ >= lines_.size())
            fail_at(all_.size(), 0, "missing '" + std::string(key) + "' line");
        const auto& l = lines_[at_];
        if (l.depth != 0 || l.text.substr(0, key.size()) != key ||
            l.text.size() <= key.size() || l.text[key.size()] != ' ')
            fail(l, "expected '" + std::string(key) + " <value>'");
        ++at_;
        const auto value = l.text.substr(key.size() + 1);
        try {
            return parse(value);
        } catch (const ParseError& e) {
            fail_at(l.offset + key.size() + 1 + e.position(), l.number, e.message());
        } catch (const std::invalid_argument& e) {
            fail_at(l.offset + key.size() + 1, l.number, e.what());
        }
    }

    Certificate node(int depth)
    {
        if (static_cast<std::size_t>(depth) > max_depth_)
            throw CapExceeded("certificate nesting exceeds depth cap " + std::to_string(max_depth_));
        if (at_ >= lines_.size())
            fail_at(all_.size(), 0, "expected a node");
        const auto l = lines_[at_++];
        if (l.depth != depth)
            fail(l, "expected a node at indentation " + std::to_string(depth * 2));
        auto words = split(l.text);
        auto n = std::make_shared<CertNode>();
        const auto& kind = words.front();
        std::size_t fields = 1;
        if (kind == "LEAF")
            n->kind = NodeKind::Leaf;
        else if (kind == "SKIPPED")
            n->kind = NodeKind::Skipped;
        else if (kind == "ATTACHED")
            n->kind = NodeKind::Attached;
        else if (kind == "LIFT") {
            n->kind = NodeKind::Lift;
            try {
                n->lift_level = FamilyParams::parse(field(l, words, 1, "level"));
            } catch (const ParseError& e) {
                fail(l, "bad lift level: " + e.message());
            } catch (const std::invalid_argument& e) {
                fail(l, std::string("bad lift level: ") + e.what());
            }
            n->gate = number(l, field(l, words, 2, "gate"));
            fields = 3;
        } else
            fail(l, "unknown node kind '" + std::string(kind) + "'");
        n->varmin = number(l, field(l, words, fields, "varmin"));
        n->varmax = number(l, field(l, words, fields + 1, "varmax"));
        if (words.size() != fields + 2)
            fail(l, "unexpected fields after varmax");

        switch (n->kind) {
        case NodeKind::Leaf:
            while (at_ < lines_.size() && lines_[at_].depth > depth) {
                const auto& b = lines_[at_];
                if (b.depth != depth + 1)
                    fail(b, "leaf branches must be indented one level");
                try {
                    n->chain.push_back(Branch::parse(b.text));
                } catch (const ParseError& e) {
                    fail_at(b.offset + e.position(), b.number, e.message());
                }
                ++at_;
            }
            if (n->chain.empty())
                fail(l, "leaf without branches");
            break;
        case NodeKind::Skipped:
        case NodeKind::Attached:
            while (at_ < lines_.size() && lines_[at_].depth > depth) {
                const auto p = lines_[at_++];
                if (p.depth != depth + 1 || p.text.substr(0, 11) != "PART sigma=")
                    fail(p, "expected 'PART sigma=<branch>'");
                CertPart part;
                try {
                    part.witness = Branch::parse(p.text.substr(11));
                } catch (const ParseError& e) {
                    fail_at(p.offset + 11 + e.position(), p.number, e.message());
                }
                part.node = node(depth + 2);
                n->parts.push_back(std::move(part));
            }
            if (n->parts.empty())
                fail(l, "branching without parts");
            break;
        case NodeKind::Lift:
            n->inner = node(depth + 1);
            break;
        }
        return n;
    }

    static std::vector<std::string_view> split(std::string_view s)
    {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && s[i] == ' ')
                ++i;
            auto j = i;
            while (j < s.size() && s[j] != ' ')
                ++j;
            if (j > i)
                out.push_back(s.substr(i, j - i));
            i = j;
        }
        return out;
    }

    std::string_view field(const Line& l, const std::vector<std::string_view>& words, std::size_t i,
                           std::string_view key)
    {
        if (i >= words.size() || words[i].substr(0, key.size() + 1) != std::string(key) + "=")
            fail(l, "expected field '" + std::string(key) + "='");
        return words[i].substr(key.size() + 1);
    }

    std::size_t number(const Line& l, std::string_view s)
    {
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            fail_at(static_cast<std::size_t>(s.data() - all_.data()), l.number,
                    "expected a natural number");
        return v;
    }

    [[noreturn]] void fail(const Line& l, const std::string& msg) { fail_at(l.offset, l.number, msg); }

    [[noreturn]] void fail_at(std::size_t offset, std::size_t line, const std::string& msg)
    {
        const auto where = line == 0 ? std::string("end of input") : "line " + std::to_string(line);
        throw ParseError("certificate: " + where + ": " + msg, std::string(all_), offset);
    }

    std::string_view all_;
    std::size_t max_depth_;
    std::vector<Line> lines_;
    std::size_t at_ = 0;
};

} // namespace

std::string dump_certificate(const CertNode& node, int depth)
{
    std::ostringstream out;
    dump(node, depth, out);
    return out.str();
}

std::string write_certificate(const CertificateFile& file)
{
    std::ostringstream out;
    out << "regime " << file.params.to_string() << '\n'
        << "sigma " << file.sigma.to_string() << '\n'
        << "set " << file.set.to_string() << '\n';
    dump(*file.cert, 0, out);
    return out.str();
}

CertificateFile read_certificate(std::string_view text, std::size_t max_depth)
{
    return Reader(text, max_depth).read();
}

} // namespace gfam
