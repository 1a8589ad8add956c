/*
 * Copyright 2026 The SuperCone Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "supercone/dataio.hpp"

namespace supercone {

// Runs one command line (without the program name). Returns the process exit
// code: 0 success, 1 runtime error, 2 usage, configuration or missing input.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "classes=2,dim=2,n=200,test_n=200,sep=2,seed=1"; omitted keys keep the
// GaussianMixtureSpec defaults and test_n defaults to n.
struct SynthSpec {
  GaussianMixtureSpec train;
  std::size_t test_n = 0;
};
SynthSpec ParseSynthSpec(const std::string& text);

}  // namespace supercone
