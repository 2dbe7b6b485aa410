#pragma once

#include <optional>
#include <string>

#include "ac4a/api_gate.hpp"
#include "ac4a/difference.hpp"

// Permission functions for the reference applications used in the
// examples and scenario fixtures: a tic-tac-toe game, a date-tree calendar,
// a timestamp-interval calendar, a travel site, a payment wallet and a
// file system. Each expects the matching forest under data/forests/.
namespace ac4a::apps {

PermissionFunction game_permission_function();
// GameId(x) minus GameId(y): ∅ when y is `?` or y == x, else {GameId(x)}.
DifferenceFunction game_difference_function();

PermissionFunction calendar_permission_function();
PermissionFunction calendar_unix_permission_function();
PermissionFunction travel_permission_function();
PermissionFunction wallet_permission_function();
PermissionFunction filesystem_permission_function();

// Calendar action by endpoint name: create for reserve/create/add, write
// for update/edit/modify/delete/remove, read otherwise.
std::string calendar_action(const std::string& endpoint);

std::optional<PermissionFunction> builtin_permission_function(const std::string& app);

// Registers the built-in permission function and custom difference
// function for `app` if there are any. Returns whether it knew the app.
bool install_builtin(ApplicationRegistry& registry, const std::string& app);

}  // namespace ac4a::apps
