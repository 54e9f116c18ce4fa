#pragma once

#include <string_view>

#include "fleet/logic/formula.hpp"

namespace fleet::logic {

/// Parse a mission formula.
///
///   or    := and ('|' and)*
///   and   := until ('&' until)*
///   until := unary ('U' unary)*
///   unary := ('!' | 'X' | 'F') unary | primary
///   primary := 'true' | ident | '(' or ')'
///
/// `X`, `F`, `U` and `G` are reserved words. `G` and negation of anything
/// other than an atom raise NotCoSafe; malformed input raises SyntaxError.
Formula parse_formula(std::string_view text);

}  // namespace fleet::logic
