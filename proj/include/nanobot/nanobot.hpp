#pragma once

#include "nanobot/agent.hpp"
#include "nanobot/config.hpp"
#include "nanobot/engine.hpp"
#include "nanobot/environment.hpp"
#include "nanobot/field.hpp"
#include "nanobot/io.hpp"
#include "nanobot/rng.hpp"
#include "nanobot/vec3.hpp"
