#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mde::pta {

using VarId = std::uint32_t;

enum class VarKind : std::uint8_t { Stack, Heap };

/// Interned variable names. Ids are dense and ordered by first interning.
class SymbolTable {
public:
    VarId intern(const std::string& name, VarKind kind) {
        if (auto it = ids_.find(name); it != ids_.end()) return it->second;
        const auto id = static_cast<VarId>(names_.size());
        names_.push_back(name);
        kinds_.push_back(kind);
        ids_.emplace(name, id);
        return id;
    }

    [[nodiscard]] std::optional<VarId> find(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::string& name(VarId id) const { return names_.at(id); }
    [[nodiscard]] VarKind kind(VarId id) const { return kinds_.at(id); }
    [[nodiscard]] bool is_heap(VarId id) const { return kind(id) == VarKind::Heap; }
    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::vector<VarKind> kinds_;
    std::unordered_map<std::string, VarId> ids_;
};

/// Heap sites are named H0, H1, ...; such names cannot be declared.
[[nodiscard]] inline bool is_heap_site_name(std::string_view s) {
    if (s.size() < 2 || s[0] != 'H') return false;
    for (char c : s.substr(1))
        if (c < '0' || c > '9') return false;
    return true;
}

/// Snapshot codec for variables: names on disk, ids in memory.
struct VarCodec {
    SymbolTable* symbols;

    [[nodiscard]] std::string encode(VarId v) const { return symbols->name(v); }
    [[nodiscard]] VarId decode(const std::string& s) const {
        return symbols->intern(s, is_heap_site_name(s) ? VarKind::Heap : VarKind::Stack);
    }
};

enum class StmtKind : std::uint8_t { AddressOf, Copy, Load, Store, Alloc, Use };

/// `lhs`/`rhs` per kind: p = &x (p, x), p = q (p, q), p = *q (p, q),
/// *p = q (p, q), p = new (p, site), use x (x, unused).
struct Statement {
    StmtKind kind;
    VarId lhs = 0;
    VarId rhs = 0;
    int line = 0;
};

struct Block {
    std::string label;
    int line = 0;
    std::vector<Statement> statements;
    std::vector<std::size_t> successors;
    std::vector<std::size_t> predecessors;
    std::size_t first_statement = 0;  // global number of statements[0], 0-based
};

/// A single function: block 0 is the entry, the last block is the exit.
struct Program {
    std::string name;
    SymbolTable symbols;
    std::vector<VarId> variables;
    std::vector<VarId> heap_sites;
    std::vector<Block> blocks;

    [[nodiscard]] std::size_t entry() const noexcept { return 0; }
    [[nodiscard]] std::size_t exit() const noexcept { return blocks.size() - 1; }
    [[nodiscard]] std::size_t statement_count() const noexcept {
        return blocks.empty() ? 0 : blocks.back().first_statement + blocks.back().statements.size();
    }

    /// Block order for forward iteration; reversed for backward.
    [[nodiscard]] std::vector<std::size_t> reverse_post_order() const {
        std::vector<std::size_t> post;
        std::vector<char> seen(blocks.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> stack{{entry(), 0}};
        seen[entry()] = 1;
        while (!stack.empty()) {
            auto& [b, next] = stack.back();
            if (next < blocks[b].successors.size()) {
                const auto s = blocks[b].successors[next++];
                if (!seen[s]) {
                    seen[s] = 1;
                    stack.emplace_back(s, 0);
                }
            } else {
                post.push_back(b);
                stack.pop_back();
            }
        }
        return {post.rbegin(), post.rend()};
    }
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

namespace detail {

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!alpha(s[0])) return false;
    for (char c : s)
        if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
    return true;
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::string spaced;
    for (char c : line) {
        if (c == '=') {
            spaced += " = ";
        } else {
            spaced += c;
        }
    }
    std::istringstream in(spaced);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

}  // namespace detail

/// Parses the line-based program format. Ids for new names are interned into
/// a copy of `symbols`, so a caller can keep ids stable across programs.
inline Program parse_program(std::string_view text, SymbolTable symbols = {}) {
    Program prog;
    prog.symbols = std::move(symbols);

    struct PendingGoto {
        std::vector<std::string> labels;
        int line;
    };
    std::vector<std::optional<PendingGoto>> gotos;
    std::map<std::string, std::size_t> labels;
    std::map<std::string, VarId> declared;
    bool seen_func = false, seen_end = false;
    int line_no = 0, last_line = 0;

    auto var = [&](const std::string& name) -> VarId {
        auto it = declared.find(name);
        if (it == declared.end()) throw ParseError(line_no, "undeclared variable '" + name + "'");
        return it->second;
    };
    auto current = [&]() -> Block& {
        if (prog.blocks.empty()) throw ParseError(line_no, "statement before the first block (missing entry block)");
        if (gotos.back()) throw ParseError(line_no, "statement after goto");
        return prog.blocks.back();
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto tok = detail::tokenize(line);
        if (tok.empty()) continue;
        last_line = line_no;
        if (seen_end) throw ParseError(line_no, "text after 'end'");

        if (!seen_func) {
            if (tok[0] != "func" || tok.size() != 2 || !detail::is_identifier(tok[1]))
                throw ParseError(line_no, "expected 'func <name>'");
            prog.name = tok[1];
            seen_func = true;
            continue;
        }
        if (tok[0] == "var") {
            if (!prog.blocks.empty()) throw ParseError(line_no, "'var' after the first block");
            for (std::size_t i = 1; i < tok.size(); ++i) {
                if (!detail::is_identifier(tok[i])) throw ParseError(line_no, "bad variable name '" + tok[i] + "'");
                if (is_heap_site_name(tok[i])) throw ParseError(line_no, "'" + tok[i] + "' is reserved for heap sites");
                if (tok[i] == "new") throw ParseError(line_no, "'new' is reserved");
                const VarId id = prog.symbols.intern(tok[i], VarKind::Stack);
                if (!declared.emplace(tok[i], id).second)
                    throw ParseError(line_no, "duplicate variable '" + tok[i] + "'");
                prog.variables.push_back(id);
            }
            continue;
        }
        if (tok[0] == "block") {
            if (tok.size() != 2 || !detail::is_identifier(tok[1])) throw ParseError(line_no, "expected 'block <label>'");
            if (!labels.emplace(tok[1], prog.blocks.size()).second)
                throw ParseError(line_no, "duplicate block label '" + tok[1] + "'");
            prog.blocks.push_back(Block{tok[1], line_no, {}, {}, {}, 0});
            gotos.emplace_back();
            continue;
        }
        if (tok[0] == "end") {
            if (tok.size() != 1) throw ParseError(line_no, "unexpected text after 'end'");
            seen_end = true;
            continue;
        }
        if (tok[0] == "goto") {
            if (tok.size() < 2 || tok.size() > 3) throw ParseError(line_no, "expected 'goto <label> [<label>]'");
            current();
            gotos.back() = PendingGoto{{tok.begin() + 1, tok.end()}, line_no};
            continue;
        }
        if (tok[0] == "use") {
            if (tok.size() != 2) throw ParseError(line_no, "expected 'use <var>'");
            Block& b = current();
            b.statements.push_back({StmtKind::Use, var(tok[1]), 0, line_no});
            continue;
        }
        if (tok.size() != 3 || tok[1] != "=") throw ParseError(line_no, "unrecognized statement");
        Block& b = current();
        const std::string& l = tok[0];
        const std::string& r = tok[2];
        if (l.size() > 1 && l[0] == '*') {
            if (r[0] == '*' || r[0] == '&' || r == "new") throw ParseError(line_no, "store source must be a variable");
            b.statements.push_back({StmtKind::Store, var(l.substr(1)), var(r), line_no});
        } else if (r == "new") {
            const VarId p = var(l);
            const std::string site = "H" + std::to_string(prog.heap_sites.size());
            const VarId h = prog.symbols.intern(site, VarKind::Heap);
            prog.heap_sites.push_back(h);
            b.statements.push_back({StmtKind::Alloc, p, h, line_no});
        } else if (r.size() > 1 && r[0] == '&') {
            b.statements.push_back({StmtKind::AddressOf, var(l), var(r.substr(1)), line_no});
        } else if (r.size() > 1 && r[0] == '*') {
            b.statements.push_back({StmtKind::Load, var(l), var(r.substr(1)), line_no});
        } else {
            b.statements.push_back({StmtKind::Copy, var(l), var(r), line_no});
        }
    }
    if (!seen_func) throw ParseError(last_line, "expected 'func <name>'");
    if (!seen_end) throw ParseError(last_line, "missing 'end'");

    if (prog.blocks.empty()) {
        prog.blocks.push_back(Block{"entry", 0, {}, {}, {}, 0});
        gotos.emplace_back();
    }
    if (gotos.back()) throw ParseError(gotos.back()->line, "the last block is the exit and cannot end in goto");

    std::size_t numbered = 0;
    for (std::size_t i = 0; i < prog.blocks.size(); ++i) {
        Block& b = prog.blocks[i];
        b.first_statement = numbered;
        numbered += b.statements.size();
        if (!gotos[i]) {
            if (i + 1 < prog.blocks.size()) b.successors.push_back(i + 1);
            continue;
        }
        for (const auto& label : gotos[i]->labels) {
            auto it = labels.find(label);
            if (it == labels.end()) throw ParseError(gotos[i]->line, "unknown block label '" + label + "'");
            if (std::find(b.successors.begin(), b.successors.end(), it->second) == b.successors.end())
                b.successors.push_back(it->second);
        }
    }
    for (std::size_t i = 0; i < prog.blocks.size(); ++i)
        for (auto s : prog.blocks[i].successors) prog.blocks[s].predecessors.push_back(i);

    std::vector<char> reached(prog.blocks.size(), 0);
    for (auto b : prog.reverse_post_order()) reached[b] = 1;
    for (std::size_t i = 0; i < prog.blocks.size(); ++i) {
        if (!reached[i])
            throw ParseError(prog.blocks[i].line, "block '" + prog.blocks[i].label + "' is unreachable from the entry");
    }
    return prog;
}

}  // namespace mde::pta
