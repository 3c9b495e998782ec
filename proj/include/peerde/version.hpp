#pragma once

#define PEERDE_VERSION "0.1.0"
