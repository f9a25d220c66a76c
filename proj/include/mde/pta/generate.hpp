#pragma once

#include <string>
#include <vector>

#include "mde/rng.hpp"

namespace mde::pta {

namespace detail {

inline std::string random_statement(Rng& rng, const std::vector<std::string>& vars) {
    const auto& p = vars[rng.below(vars.size())];
    const auto& q = vars[rng.below(vars.size())];
    switch (rng.below(6)) {
        case 0: return p + " = &" + q;
        case 1: return p + " = " + q;
        case 2: return p + " = *" + q;
        case 3: return "*" + p + " = " + q;
        case 4: return p + " = new";
        default: return "use " + p;
    }
}

inline std::vector<std::string> var_names(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("v" + std::to_string(i));
    return v;
}

inline std::string var_line(const std::vector<std::string>& vars) {
    std::string s = "var";
    for (const auto& v : vars) s += " " + v;
    return s + "\n";
}

}  // namespace detail

/// Random CFG with 1..max_blocks blocks and 1..max_vars variables. Block i
/// always reaches block i+1, so every block is reachable; other edges are
/// arbitrary, including back edges.
inline std::string random_program_text(Rng& rng, std::size_t max_blocks = 10, std::size_t max_vars = 6,
                                       std::size_t max_statements = 4) {
    const auto vars = detail::var_names(rng.between(1, max_vars));
    const std::size_t blocks = rng.between(1, max_blocks);
    std::string text = "func random\n" + detail::var_line(vars);
    for (std::size_t b = 0; b < blocks; ++b) {
        text += "block b" + std::to_string(b) + "\n";
        const std::size_t n = rng.below(max_statements + 1);
        for (std::size_t i = 0; i < n; ++i) text += "  " + detail::random_statement(rng, vars) + "\n";
        if (b + 1 == blocks) break;
        switch (rng.below(3)) {
            case 0: break;  // fall through
            case 1: text += "  goto b" + std::to_string(b + 1) + "\n"; break;
            default:
                text += "  goto b" + std::to_string(b + 1) + " b" + std::to_string(rng.below(blocks)) + "\n";
                break;
        }
    }
    return text + "end\n";
}

struct LoopProgramShape {
    std::size_t loops = 12;
    std::size_t inner_loops = 2;
    std::size_t vars = 8;
    std::size_t statements_per_block = 3;
};

/// Sequence of loops, each with nested inner loops and a conditional body.
/// Few variables and many blocks make facts repeat heavily across points.
inline std::string loop_program_text(Rng& rng, const LoopProgramShape& shape = {}) {
    const auto vars = detail::var_names(shape.vars);
    std::string text = "func loops\n" + detail::var_line(vars);
    auto body = [&](std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) text += "  " + detail::random_statement(rng, vars) + "\n";
    };
    text += "block entry\n";
    for (std::size_t i = 0; i < vars.size(); ++i) text += "  " + vars[i] + " = new\n";
    for (std::size_t l = 0; l < shape.loops; ++l) {
        const std::string id = std::to_string(l);
        const std::string after = "after" + id;
        text += "block head" + id + "\n";
        body(shape.statements_per_block);
        text += "  goto in" + id + "_0 " + after + "\n";
        for (std::size_t k = 0; k < shape.inner_loops; ++k) {
            const std::string in = "in" + id + "_" + std::to_string(k);
            const std::string next =
                k + 1 < shape.inner_loops ? "in" + id + "_" + std::to_string(k + 1) : "latch" + id;
            text += "block " + in + "\n";
            body(shape.statements_per_block);
            text += "  goto " + next + " " + in + "\n";
        }
        text += "block latch" + id + "\n";
        body(shape.statements_per_block);
        text += "  goto head" + id + "\n";
        text += "block " + after + "\n";
        body(shape.statements_per_block);
    }
    text += "block exit\n";
    for (const auto& v : vars) text += "  use " + v + "\n";
    return text + "end\n";
}

}  // namespace mde::pta
