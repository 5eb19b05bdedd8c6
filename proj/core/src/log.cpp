#include "softtree/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace softtree {

spdlog::logger& logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto l = spdlog::stderr_color_mt("softtree");
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::info);
        return l;
    }();
    return *instance;
}

void init_logging() {
    auto level = spdlog::level::info;
    if (const char* env = std::getenv("SOFTTREE_LOG")) {
        std::string_view v{env};
        if (v == "error") level = spdlog::level::err;
        else if (v == "debug") level = spdlog::level::debug;
        else if (v == "info") level = spdlog::level::info;
        else logger().warn("ignoring unknown SOFTTREE_LOG value '{}'", v);
    }
    logger().set_level(level);
}

}  // namespace softtree
