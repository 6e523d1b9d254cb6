"""Package-wide default values, overridable through service configuration."""

DEFAULT_RUNTIME_URL = "https://aframe.io/releases/1.6.0/aframe.min.js"
DEFAULT_APP_TITLE = "Web XR App"
DEFAULT_LISTEN_ADDRESS = "127.0.0.1:8571"
DEFAULT_CORS_ORIGIN = "*"
