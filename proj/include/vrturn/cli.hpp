#pragma once

namespace vrturn::cli {

int run(int argc, char** argv);

}  // namespace vrturn::cli
