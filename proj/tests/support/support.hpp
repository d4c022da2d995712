#pragma once

#include "feather/commands.hpp"
#include "feather/syntax.hpp"
#include "feather/tvl.hpp"

#include <optional>

#include <random>
#include <string>
#include <vector>

namespace feather::testing {

using Rng = std::mt19937_64;

std::string fixture_path(const std::string& name);
std::string read_text(const std::string& path);

/// Declarations file from the fixture directory, built into a model.
FeatureModel load_model(const std::string& name);
FeatureModel model_from_text(const std::string& declarations);
std::vector<Command> commands_from_text(const std::string& text);
Command command_from_text(const std::string& text);

/// Runs one command given as text and returns its outcome.
CommandOutcome run(FeatureModel& model, const std::string& command_text);

std::vector<std::string> names(const FeatureModel& m, const std::vector<FeatureId>& ids);
std::vector<std::string> child_names(const FeatureModel& m, const std::string& parent);

// ---------------------------------------------------------------------------
// Random models and expressions

struct ModelShape {
    int max_features = 30;
    int max_attributes = 6;
    int max_constraints = 10;
    /// Feature names may contain spaces and punctuation.
    bool fancy_names = true;
};

FeatureModel random_model(Rng& rng, const ModelShape& shape = {});

/// A where-clause over `variables` (a subset may go unused), as text.
std::string random_where(Rng& rng, const FeatureModel& model, const std::vector<std::string>& variables,
                         int depth = 3);

/// Brute force: every tuple of live features, kept when the clause
/// evaluates to true. No pruning of any kind.
std::vector<std::vector<FeatureId>> naive_resolve(const FeatureModel& model, std::size_t variable_count,
                                                  const Expression& where);

/// A random command of any of the ten types, as text. Mostly valid against
/// the model, sometimes deliberately wrong.
std::string random_command(Rng& rng, const FeatureModel& model);

/// A random document in the accepted TVL subset, with its expected size.
struct TvlSample {
    std::string text;
    std::size_t features = 0;
    std::size_t constraints = 0; ///< distinct effects
};
TvlSample random_tvl(Rng& rng, int max_features = 25);

// ---------------------------------------------------------------------------
// Computer parts model used by the large replays

struct PartsCatalog {
    std::string declarations;
    std::size_t features = 0;
    std::vector<std::string> top_categories; ///< 12
    std::vector<std::string> subcategories;  ///< 60, five per top category
    std::vector<int> price_category;         ///< per part, 1..5
    std::vector<int> rating;                 ///< per part, -1 when unrated
};

PartsCatalog computer_parts_catalog(unsigned seed = 7);

/// Restructuring by price: six additions, five bulk moves and 42 removals.
std::string price_restructuring_script(const PartsCatalog& catalog);
/// Price and performance categories plus two bulk excludes commands.
std::string category_constraints_script();

/// Performance bands used by the second script, as [min, max].
inline constexpr int performance_bands[5][2] = {{0, 19}, {20, 39}, {40, 59}, {60, 79}, {80, 200}};

// ---------------------------------------------------------------------------
// Property checks. Each returns an empty string on success, else a
// description of the first counterexample.

/// resolve() against brute force on one random model and clause.
std::string resolver_trial(Rng& rng, const ModelShape& shape = {});

struct FuzzTally {
    std::size_t executed = 0;
    std::size_t no_effect = 0;
    std::size_t rejected_statically = 0;
};

/// Runs `commands` random commands on one random model, validating the
/// model after each and checking that no-effect commands change nothing.
std::string integrity_trial(Rng& rng, int commands, FuzzTally& tally, const ModelShape& shape = {});

/// A multi-target command with variable-free slots and the single
/// commands it expands to, one per target in target order.
struct MultiInstance {
    std::string multi;
    std::vector<std::string> singles;
};
std::optional<MultiInstance> random_multi_instance(Rng& rng, const FeatureModel& model);

/// `nontrivial` is set when the command had targets and an effect.
std::string single_multi_trial(Rng& rng, bool* nontrivial = nullptr, const ModelShape& shape = {});

/// import, export, import again on one generated TVL document.
std::string tvl_round_trip_trial(Rng& rng);

} // namespace feather::testing
