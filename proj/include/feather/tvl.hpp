#pragma once

#include "feather/syntax.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace feather {

struct TvlDocument {
    FeatureModel model;
    /// The `enum string in {...};` header exactly as written, if present.
    std::optional<std::string> string_type;
};

/// Reads a model in the accepted TVL subset. Feature ids follow the order
/// of the feature blocks.
Result<TvlDocument, Diagnostics> import_tvl(std::string_view text);

class TvlExportError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Writes `model` in the TVL subset: the root block first, then one block
/// per feature in preorder. Constraints go into the root block. Throws
/// TvlExportError when a name cannot be written as a TVL identifier.
std::string export_tvl(const FeatureModel& model, const std::optional<std::string>& string_type = std::nullopt);

bool is_tvl_keyword(std::string_view word) noexcept;
/// A letter followed by letters, digits and underscores, and not a keyword.
bool is_tvl_id(std::string_view text) noexcept;

} // namespace feather
