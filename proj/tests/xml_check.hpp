// Copyright 2026 The leafkit Authors. All Rights Reserved.
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


// Well-formedness check through Boost.PropertyTree's XML reader.

#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <sstream>
#include <string>

namespace leafkit::testing {

/// Parses `xml`; returns the root element name, or "" on a parse error.
inline std::string xml_root(const std::string& xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error&) {
    return "";
  }
  for (const auto& [name, child] : tree) {
    if (name != "<xmlcomment>") return name;
  }
  return "";
}

/// Number of direct or nested elements named `tag` under the root.
inline std::size_t xml_count(const std::string& xml, const std::string& tag) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(xml);
  pt::read_xml(in, tree);
  std::size_t n = 0;
  auto walk = [&](auto&& self, const pt::ptree& t) -> void {
    for (const auto& [name, child] : t) {
      if (name == tag) ++n;
      self(self, child);
    }
  };
  walk(walk, tree);
  return n;
}

}  // namespace leafkit::testing
