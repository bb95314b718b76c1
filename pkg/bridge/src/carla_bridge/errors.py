class BridgeError(Exception):
    """Base class for capture-bridge failures."""


class BridgeConnectionError(BridgeError):
    """Simulator endpoint unreachable or client library unavailable."""

    def __init__(self, endpoint, msg):
        super().__init__(f"{endpoint}: {msg}")
        self.endpoint = endpoint


class DesyncError(BridgeError):
    """Sensor bundles for one tick carry mismatched tick ids."""

    def __init__(self, tick_id, sensor_ticks):
        super().__init__(f"tick {tick_id}: sensor ticks {sensor_ticks}")
        self.tick_id = tick_id
        self.sensor_ticks = sensor_ticks


class SpawnError(BridgeError):
    """An actor in a scenario script could not be spawned."""

    def __init__(self, actor_index, msg):
        super().__init__(f"actor {actor_index}: {msg}")
        self.actor_index = actor_index
