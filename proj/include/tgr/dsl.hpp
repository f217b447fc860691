#pragma once

#include <map>

#include "tgr/algebra.hpp"

namespace tgr {

struct ParseError : std::runtime_error {
    ParseError(unsigned line, unsigned column, const std::string& message)
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + message),
          line(line),
          column(column),
          message(message) {}

    unsigned line, column;
    std::string message;
};

// A parsed .tg program: one signature, named tiered functions (tier sigs
// fully resolved on every AST node), optional named term constants.
struct ProgramFile {
    Signature sig;
    std::vector<std::pair<std::string, FnPtr>> fns;  // declaration order
    std::map<std::string, FnPtr> fn_by_name;
    std::map<std::string, std::string> term_constants;  // name -> source text

    const FnPtr& fn(const std::string& name) const;
};

ProgramFile parse_program(std::string_view source);

// Combinator-syntax pretty printer; parse(pretty_print(p)) round-trips.
std::string pretty_print(const ProgramFile& p);
std::string pretty_print_fn(const FnPtr& f, const Signature& sig);

}  // namespace tgr
