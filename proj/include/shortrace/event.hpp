#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "shortrace/random_model.hpp"

namespace shortrace {

// Tiny predicate language over coordinates x1..xr:
//   clause  := chain | "order" | "top:" s | ("norm" | "linf") op number
//   chain   := operand op operand {op operand}      e.g. x1>x2>0, x3<=-1.5
//   operand := "x" index | number
//   op      := > | < | >= | <=
//   event   := clause {"&" clause}
// Indices are 1-based and must not exceed r.
struct ParsedEvent {
    std::string text;
    Event predicate;
};

ParsedEvent parse_event(std::string_view text, std::size_t r);

}  // namespace shortrace
