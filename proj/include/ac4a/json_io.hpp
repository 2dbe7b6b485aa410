#pragma once

#include <json.hpp>

#include "ac4a/checker.hpp"
#include "ac4a/resource_model.hpp"
#include "ac4a/web_gate.hpp"

namespace ac4a {

using Json = nlohmann::json;

Json forest_to_json(const ResourceForest& forest);

Json permission_to_json(const Permission& p);
Permission permission_from_json(const Json& j);

Json need_to_json(const NeedItem& n);
NeedItem need_from_json(const Json& j);

Json access_need_to_json(const AccessNeed& need);
AccessNeed access_need_from_json(const Json& j);

Json check_result_to_json(const CheckResult& result);

// {"blocked":[{"path","reasons":[{"rvs","action","error"?}]}]}
Json mask_plan_to_json(const MaskPlan& plan);

}  // namespace ac4a
