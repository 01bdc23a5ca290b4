#pragma once

#include <cstdint>
#include <string_view>

namespace egonav {

enum class SemanticClass : std::uint8_t {
  Ground = 0,
  Stair = 1,
  Door = 2,
  Wall = 3,
  Obstacle = 4,
  Movable = 5,
  RoughGround = 6,
  Unlabeled = 7,
};
inline constexpr int kNumClasses = 8;

std::string_view class_name(SemanticClass c);
SemanticClass class_from_name(std::string_view name);  // throws ParseError

/// Classes scored by the collision predicate (doors, movables and misses are not).
constexpr bool is_static_class(SemanticClass c) {
  return c == SemanticClass::Ground || c == SemanticClass::Stair || c == SemanticClass::Wall ||
         c == SemanticClass::Obstacle || c == SemanticClass::RoughGround;
}

}  // namespace egonav
