// Copyright 2026 The clmark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// One-sided one-sample t-test reference values, frozen from
// scipy.stats.ttest_1samp(deltas, tau, alternative="greater") (scipy 1.15.3).

#ifndef CLMARK_TESTS_DATA_TTEST_REFERENCE_H_
#define CLMARK_TESTS_DATA_TTEST_REFERENCE_H_

#include <vector>

namespace clmark::testdata {

struct TTestCase {
  std::vector<double> deltas;
  double tau;
  double t_statistic;
  double p_value;
};

inline const std::vector<TTestCase> kTTestCases = {
    {{0.12, 0.15, 0.11, 0.14}, 0.05, 8.7635609200826572, 0.001564613354663242},
    {{-0.0415, 0.0131, -0.0225, -0.1317, 0.0676}, 0.099, -3.7063615157776364, 0.98964009204943215},
    {{0.0756, 0.0868, 0.0634, 0.0771}, 0.171, -19.849407046427533, 0.99986028464847831},
    {{0.0949, 0.1248, 0.0455, 0.0975}, 0.105, -0.86781963816297225, 0.77532928672218215},
    {{0.0459, 0.0634, 0.0609, 0.0538, 0.0434, 0.0741, 0.0439, 0.0344, 0.053, 0.0689}, 0.046, 2.0518680721204485, 0.035200323818019331},
    {{-0.151, -0.0401}, 0.183, -5.0234445446348053, 0.93745277771825675},
    {{0.2647, 0.2773, 0.2606, 0.2518}, 0.113, 28.412565743903357, 4.7860370731535497e-05},
    {{0.0191, 0.0854, 0.1005, 0.1237, 0.0837, 0.1236, 0.0938, 0.0481, 0.1217}, 0.074, 1.2456278161634928, 0.12407242606176565},
    {{-0.0013, 0.1545, 0.0341, 0.1791, 0.2209, 0.1038}, 0.112, 0.090547231283201968, 0.46568391695824274},
    {{0.252, 0.2274, 0.1073, 0.1892}, 0.124, 2.2110092275519482, 0.056997122585008102},
    {{-0.1179, 0.0872, 0.1388, -0.0394, 0.0111, 0.086, 0.0017, 0.0688}, 0.184, -5.2981380961436262, 0.99943717945583654},
    {{0.2926, 0.2049}, 0.196, 1.2029646522234891, 0.22075587156396384},
    {{0.3046, 0.2579, 0.2085, 0.2662, 0.3612, 0.2452, 0.2453, 0.175}, 0.051, 10.314112036664502, 8.7209273085293932e-06},
    {{-0.0316, 0.0734}, 0.018, 0.055238095238095294, 0.48243501871189359},
    {{-0.0104, 0.0282}, 0.071, -3.2176165803108812, 0.90408515268845058},
    {{0.1855, 0.2146, 0.254, 0.2583, 0.2253, 0.2285, 0.2421, 0.1819}, 0.071, 15.052513408077672, 6.8605442247794504e-07},
    {{0.108, 0.1339}, 0.096, 1.9266409266409272, 0.15239461789365291},
    {{0.231, 0.1377, 0.1739, 0.2415, 0.2665, 0.2178, 0.2315}, 0.153, 3.6945863674790895, 0.005076668366701724},
    {{0.1951, 0.1938, 0.1719}, 0.183, 0.52263064384480207, 0.32667886825729364},
    {{0.0189, 0.0197, 0.0143, 0.1445, 0.065}, 0.034, 0.74566192867229986, 0.24865257103678781},
};

}  // namespace clmark::testdata

#endif  // CLMARK_TESTS_DATA_TTEST_REFERENCE_H_
