#include "weakpath/network_format.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace weakpath {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string &message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      detail_(message) {
}

namespace {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Token> split_tokens(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            i++;
        }
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            i++;
        }
        if (i > start) {
            out.push_back({line.substr(start, i - start), start + 1});
        }
    }
    return out;
}

std::vector<Token> split_commas(Token tok) {
    std::vector<Token> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= tok.text.size(); i++) {
        if (i == tok.text.size() || tok.text[i] == ',') {
            out.push_back({tok.text.substr(start, i - start), tok.column + start});
            start = i + 1;
        }
    }
    return out;
}

struct LineParser {
    std::size_t line_no;

    [[noreturn]] void fail(std::size_t column, const std::string &msg) const {
        throw ParseError(line_no, column, msg);
    }

    double number(Token tok) const {
        double v = 0;
        const char *begin = tok.text.data();
        const char *end = begin + tok.text.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end || tok.text.empty()) {
            fail(tok.column, "expected a decimal number, got '" + std::string(tok.text) + "'");
        }
        return v;
    }

    std::size_t index(Token tok) const {
        std::size_t v = 0;
        const char *begin = tok.text.data();
        const char *end = begin + tok.text.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end || tok.text.empty()) {
            fail(tok.column, "expected a non-negative integer, got '" + std::string(tok.text) + "'");
        }
        return v;
    }

    /// Parses key=value tokens, rejecting unknown and duplicate keys.
    std::map<std::string, Token> keyed(const std::vector<Token> &toks, std::size_t first,
                                       std::initializer_list<std::string_view> allowed) const {
        std::map<std::string, Token> out;
        for (std::size_t i = first; i < toks.size(); i++) {
            auto eq = toks[i].text.find('=');
            if (eq == std::string_view::npos) {
                fail(toks[i].column, "expected key=value, got '" + std::string(toks[i].text) + "'");
            }
            std::string key(toks[i].text.substr(0, eq));
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                fail(toks[i].column, "unknown key '" + key + "'");
            }
            if (out.count(key)) {
                fail(toks[i].column, "duplicate key '" + key + "'");
            }
            out[key] = Token{toks[i].text.substr(eq + 1), toks[i].column + eq + 1};
        }
        return out;
    }

    Token require(const std::map<std::string, Token> &kv, const std::string &key, std::size_t column) const {
        auto it = kv.find(key);
        if (it == kv.end()) {
            fail(column, "missing " + key + "=");
        }
        return it->second;
    }
};

struct PendingComponent {
    std::size_t stage;
    std::size_t line;
    ComponentSpec spec;
};

struct PendingPass {
    std::size_t stage;
    std::size_t line;
    std::string arm;
};

}  // namespace

NetworkLayout parse_network(std::string_view text) {
    std::vector<std::string> arms;
    std::set<std::string, std::less<>> declared;
    std::map<std::size_t, std::pair<std::size_t, std::vector<std::string>>> slices;  // k -> (line, arms)
    std::optional<std::string> source;
    std::size_t source_line = 0;
    std::vector<DetectorPort> detectors;
    std::vector<PendingComponent> components;
    std::vector<PendingPass> passes;
    // (stage, arm) -> line of first consumer, for double-consumption diagnostics.
    std::map<std::pair<std::size_t, std::string>, std::size_t> consumed;
    std::size_t line_count = 0;

    std::size_t pos = 0;
    while (pos < text.size() || (pos == 0 && text.empty())) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        line_count++;
        LineParser p{line_count};

        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        auto toks = split_tokens(line);
        if (toks.empty()) {
            if (nl == text.size()) {
                break;
            }
            continue;
        }

        auto arm_ref = [&](Token t) {
            if (t.text.empty()) {
                p.fail(t.column, "empty arm name");
            }
            if (!declared.count(t.text)) {
                p.fail(t.column, "unknown arm '" + std::string(t.text) + "'");
            }
            return std::string(t.text);
        };
        auto consume = [&](std::size_t stage, const std::string &arm, std::size_t column) {
            auto [it, inserted] = consumed.emplace(std::make_pair(stage, arm), p.line_no);
            if (!inserted) {
                p.fail(column, "arm " + arm + " double-consumed at stage " + std::to_string(stage) +
                                   " (first used on line " + std::to_string(it->second) + ")");
            }
        };

        std::string_view kw = toks[0].text;
        if (kw == "arm") {
            if (toks.size() != 2) {
                p.fail(toks[0].column, "expected: arm <name>");
            }
            std::string name(toks[1].text);
            if (name.find_first_of(",=@:") != std::string::npos) {
                p.fail(toks[1].column, "invalid arm name '" + name + "'");
            }
            if (!declared.insert(name).second) {
                p.fail(toks[1].column, "arm '" + name + "' declared twice");
            }
            arms.push_back(name);
        } else if (kw == "slice") {
            // slice <k>: a,b,c  (whitespace around ':' and ',' is tolerated)
            std::size_t colon = line.find(':');
            if (colon == std::string_view::npos) {
                p.fail(toks[0].column, "expected: slice <k>: <arm,...>");
            }
            auto head = split_tokens(line.substr(0, colon));
            if (head.size() != 2) {
                p.fail(toks[0].column, "expected: slice <k>: <arm,...>");
            }
            std::size_t k = p.index(head[1]);
            if (slices.count(k)) {
                p.fail(head[1].column, "slice " + std::to_string(k) + " declared twice");
            }
            std::vector<std::string> members;
            std::string_view rest = line.substr(colon + 1);
            std::size_t start = 0;
            for (std::size_t i = 0; i <= rest.size(); i++) {
                if (i == rest.size() || rest[i] == ',') {
                    std::string_view piece = rest.substr(start, i - start);
                    std::size_t lead = piece.find_first_not_of(" \t\r");
                    std::size_t trail = piece.find_last_not_of(" \t\r");
                    Token t{lead == std::string_view::npos ? std::string_view{} : piece.substr(lead, trail - lead + 1),
                            colon + 2 + start + (lead == std::string_view::npos ? 0 : lead)};
                    std::string name = arm_ref(t);
                    if (std::find(members.begin(), members.end(), name) != members.end()) {
                        p.fail(t.column, "arm " + name + " listed twice in slice " + std::to_string(k));
                    }
                    members.push_back(name);
                    start = i + 1;
                }
            }
            slices[k] = {p.line_no, std::move(members)};
        } else if (kw == "source") {
            if (toks.size() != 2) {
                p.fail(toks[0].column, "expected: source <arm>");
            }
            if (source) {
                p.fail(toks[0].column, "source declared twice");
            }
            source = arm_ref(toks[1]);
            source_line = p.line_no;
        } else if (kw == "detector") {
            if (toks.size() != 2) {
                p.fail(toks[0].column, "expected: detector <port>=<arm>");
            }
            auto eq = toks[1].text.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                p.fail(toks[1].column, "expected: detector <port>=<arm>");
            }
            std::string port(toks[1].text.substr(0, eq));
            for (const auto &d : detectors) {
                if (d.name == port) {
                    p.fail(toks[1].column, "detector port " + port + " declared twice");
                }
            }
            std::string arm = arm_ref(Token{toks[1].text.substr(eq + 1), toks[1].column + eq + 1});
            detectors.push_back({port, arm});
        } else if (kw == "bs" || kw == "mirror") {
            bool is_bs = kw == "bs";
            if (toks.size() < 2 || toks[1].text.find('=') != std::string_view::npos) {
                p.fail(toks[0].column, "expected a component name after '" + std::string(kw) + "'");
            }
            auto kv = is_bs ? p.keyed(toks, 2, {"stage", "in", "out", "theta", "phase"})
                            : p.keyed(toks, 2, {"stage", "in", "out"});
            ComponentSpec c;
            c.kind = is_bs ? ComponentKind::beamsplitter : ComponentKind::mirror;
            c.name = std::string(toks[1].text);
            std::size_t stage = p.index(p.require(kv, "stage", toks[0].column));
            std::size_t arity = is_bs ? 2 : 1;
            for (auto [key, dest] : {std::pair{"in", &c.inputs}, std::pair{"out", &c.outputs}}) {
                auto parts = split_commas(p.require(kv, key, toks[0].column));
                if (parts.size() != arity) {
                    p.fail(parts[0].column, std::string(kw) + " " + c.name + " needs " + std::to_string(arity) + " " +
                                                key + " arm(s)");
                }
                for (auto t : parts) {
                    dest->push_back(arm_ref(t));
                }
            }
            for (std::size_t i = 0; i < c.inputs.size(); i++) {
                consume(stage, c.inputs[i], kv.at("in").column);
            }
            if (is_bs) {
                c.theta = p.number(p.require(kv, "theta", toks[0].column));
                if (kv.count("phase")) {
                    c.phase = p.number(kv.at("phase"));
                }
            }
            components.push_back({stage, p.line_no, std::move(c)});
        } else if (kw == "phase") {
            std::size_t first = 1;
            ComponentSpec c;
            c.kind = ComponentKind::phase;
            if (toks.size() > 1 && toks[1].text.find('=') == std::string_view::npos) {
                c.name = std::string(toks[1].text);
                first = 2;
            }
            auto kv = p.keyed(toks, first, {"stage", "arm", "value"});
            std::size_t stage = p.index(p.require(kv, "stage", toks[0].column));
            std::string arm = arm_ref(p.require(kv, "arm", toks[0].column));
            consume(stage, arm, kv.at("arm").column);
            c.inputs = {arm};
            c.outputs = {arm};
            c.phase = p.number(p.require(kv, "value", toks[0].column));
            components.push_back({stage, p.line_no, std::move(c)});
        } else if (kw == "pass") {
            auto kv = p.keyed(toks, 1, {"stage", "arm"});
            std::size_t stage = p.index(p.require(kv, "stage", toks[0].column));
            std::string arm = arm_ref(p.require(kv, "arm", toks[0].column));
            consume(stage, arm, kv.at("arm").column);
            passes.push_back({stage, p.line_no, arm});
        } else {
            p.fail(toks[0].column, "unknown directive '" + std::string(kw) + "'");
        }

        if (nl == text.size()) {
            break;
        }
    }

    std::size_t end_line = line_count + 1;
    if (!source) {
        throw ParseError(end_line, 1, "missing source declaration");
    }
    if (detectors.empty()) {
        throw ParseError(end_line, 1, "missing detector declaration");
    }
    if (slices.empty()) {
        throw ParseError(end_line, 1, "missing slice declarations");
    }

    NetworkLayout layout;
    layout.arms = arms;
    std::size_t expected = 0;
    for (auto &[k, entry] : slices) {
        if (k != expected) {
            throw ParseError(entry.first, 1, "slice " + std::to_string(expected) + " is missing");
        }
        layout.slices.push_back(entry.second);
        expected++;
    }
    layout.stages.resize(layout.slices.size() - 1);
    for (auto &pc : components) {
        if (pc.stage >= layout.stages.size()) {
            throw ParseError(pc.line, 1, "stage " + std::to_string(pc.stage) + " has no following slice");
        }
        layout.stages[pc.stage].components.push_back(std::move(pc.spec));
    }
    for (auto &pp : passes) {
        if (pp.stage >= layout.stages.size()) {
            throw ParseError(pp.line, 1, "stage " + std::to_string(pp.stage) + " has no following slice");
        }
        layout.stages[pp.stage].pass_through.push_back(pp.arm);
    }
    // Implicit pass-through: unconsumed arms that persist into the next slice.
    for (std::size_t k = 0; k < layout.stages.size(); k++) {
        for (const auto &a : layout.slices[k]) {
            if (!consumed.count({k, a}) && layout.arm_index(k + 1, a)) {
                layout.stages[k].pass_through.push_back(a);
            }
        }
    }
    layout.source = *source;
    layout.detectors = detectors;

    auto report = validate_network(layout);
    if (!report.empty()) {
        const auto &v = report.front();
        std::size_t line = source_line;
        if (v.stage) {
            line = slices.at(*v.stage + 1).first;
            for (const auto &pc : components) {
                if (pc.stage == *v.stage) {
                    line = pc.line;
                    break;
                }
            }
        }
        throw ParseError(line, 1, v.message);
    }
    return layout;
}

NetworkLayout load_network_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open network file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

namespace {

std::string render(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw std::logic_error("failed to render number");
    }
    return std::string(buf, ptr);
}

std::string join(const std::vector<std::string> &items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); i++) {
        if (i) {
            out += ',';
        }
        out += items[i];
    }
    return out;
}

}  // namespace

std::string serialize_network(const NetworkLayout &layout) {
    std::ostringstream out;
    for (const auto &a : layout.arms) {
        out << "arm " << a << "\n";
    }
    for (std::size_t k = 0; k < layout.slices.size(); k++) {
        out << "slice " << k << ": " << join(layout.slices[k]) << "\n";
    }
    out << "source " << layout.source << "\n";
    for (std::size_t k = 0; k < layout.stages.size(); k++) {
        const auto &stage = layout.stages[k];
        if (stage.raw_override) {
            throw std::invalid_argument("stage " + std::to_string(k) + " has a raw matrix override");
        }
        for (const auto &c : stage.components) {
            switch (c.kind) {
                case ComponentKind::beamsplitter:
                    out << "bs " << c.name << " stage=" << k << " in=" << join(c.inputs) << " out=" << join(c.outputs)
                        << " theta=" << render(c.theta) << " phase=" << render(c.phase) << "\n";
                    break;
                case ComponentKind::mirror:
                    out << "mirror " << c.name << " stage=" << k << " in=" << join(c.inputs)
                        << " out=" << join(c.outputs) << "\n";
                    break;
                case ComponentKind::phase:
                    out << "phase ";
                    if (!c.name.empty()) {
                        out << c.name << " ";
                    }
                    out << "stage=" << k << " arm=" << c.inputs.at(0) << " value=" << render(c.phase) << "\n";
                    break;
            }
        }
        for (const auto &a : stage.pass_through) {
            out << "pass stage=" << k << " arm=" << a << "\n";
        }
    }
    for (const auto &d : layout.detectors) {
        out << "detector " << d.name << "=" << d.arm << "\n";
    }
    return out.str();
}

}  // namespace weakpath
