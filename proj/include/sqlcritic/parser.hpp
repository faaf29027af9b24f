#pragma once

#include <string>
#include <string_view>

#include "sqlcritic/clause.hpp"

namespace sqlcritic {

/// Canonicalize one SQL statement: keywords upper-cased, identifiers
/// lower-cased, base-table aliases resolved and removed (references are
/// rewritten to the aliased table name), whitespace collapsed. String
/// literals are preserved byte-exact. Idempotent. Throws ParseError.
std::string normalize(std::string_view sql);

/// Parse and normalize, returning the ordered top-level clause list.
/// Subqueries are not split out; their text belongs to the enclosing clause.
/// A compound query (UNION/INTERSECT/EXCEPT) becomes a single SET_OP clause
/// covering the whole statement. Throws ParseError.
ClauseDecomposition decompose(std::string_view sql);

}  // namespace sqlcritic
