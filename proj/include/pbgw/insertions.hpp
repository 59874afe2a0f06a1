#pragma once

#include <string>
#include <vector>

#include "pbgw/contributions.hpp"

namespace pbgw {

/// Parse error with a character position.
struct ParseError : std::invalid_argument {
  size_t position;
  ParseError(const std::string& msg, size_t pos)
      : std::invalid_argument(msg + " at position " + std::to_string(pos)),
        position(pos) {}
};

/// Parses an insertion list against a target's basis:
///   expr  := term ("," term)*
///   term  := ("psi^" INT)? class
///   class := atom ("*" atom)*
///   atom  := "H" ("^" INT)? | "[" NAME "]" ("^" INT)? | "1"
/// Whitespace-insensitive. Basis names in brackets resolve against the
/// target's base-ring presentation.
std::vector<Insertion> parse_insertions(const TargetModel& target,
                                        const std::string& text);

/// Normalized printing; parse ∘ print is the identity on normalized input.
std::string print_insertions(const TargetModel& target,
                             const std::vector<Insertion>& ins);

}  // namespace pbgw
