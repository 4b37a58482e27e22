// Copyright 2026 The fdbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The fdbs command line. Subcommands:
//
//   gen        synthetic dataset
//   partition  split a dataset by postcode prefix or lon/lat cell
//   build      shard images from a partition manifest
//   deploy     write a topology file over images and stand it up once
//   serve      HTTP gateway for a topology
//   query      one read against a topology (in process) or a gateway URL
//   update     rolling update of one leaf to a new image
//   bench      concurrency benchmark and cost-model fit
//   topology   catalog export of a topology node
//
// Settings resolve flags > FDBS_<NAME> environment > --config file >
// defaults. Exit codes: 0 ok, 1 user error, 2 internal error.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fdbs::cli {

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fdbs::cli
